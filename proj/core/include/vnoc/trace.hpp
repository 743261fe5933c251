#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vnoc/packet.hpp"

namespace vnoc {

// One observable event. Sinks only ever consume these; nothing in the model
// reads a sink, so tracing cannot perturb behaviour.
struct TraceRecord {
  uint64_t cycle = 0;
  std::string event;         // INJ FWD GRANT AVRCV DATAIN SVC_START SVC_END
                             // RECFG_START RECFG_END CTRL DECISION
  uint8_t node_x = 0;
  uint8_t node_y = 0;
  std::string port_or_slot;  // port name, slot number, or empty
  std::optional<uint32_t> packet;
  std::optional<uint16_t> flit_ordinal;
  std::string detail;
};

class TraceSink {
public:
  virtual ~TraceSink() = default;
  virtual void record(const TraceRecord& r) = 0;
};

// In-memory sink for tests.
class MemoryTraceSink : public TraceSink {
public:
  void record(const TraceRecord& r) override { records_.push_back(r); }
  const std::vector<TraceRecord>& records() const { return records_; }
  void clear() { records_.clear(); }

private:
  std::vector<TraceRecord> records_;
};

// CSV sink: header line then one record per line, columns
// cycle,event,node_x,node_y,port_or_slot,packet_id,flit_ordinal,detail
class CsvTraceSink : public TraceSink {
public:
  explicit CsvTraceSink(const std::string& path);
  void record(const TraceRecord& r) override;

private:
  std::ofstream out_;
};

// Lifecycle of every packet injected into the fabric: when its first flit
// entered a router and when its last flit was consumed by a data receive
// unit. This is the measurement base for latency checks.
struct PacketRecord {
  uint32_t packet = 0;
  Message msg;
  uint64_t inject_cycle = 0;
  std::optional<uint64_t> delivered_cycle;
  uint16_t flits = 0;
};

class PacketBook {
public:
  // Returns the trace id for a packet whose injection starts now.
  uint32_t open(const Message& msg, uint64_t inject_cycle, uint16_t flits);
  void mark_delivered(uint32_t packet, uint64_t cycle);
  const std::vector<PacketRecord>& records() const { return records_; }
  const PacketRecord& at(uint32_t packet) const;

private:
  std::vector<PacketRecord> records_;
};

}  // namespace vnoc
