#include "vnoc/trace.hpp"

#include <string>

namespace vnoc {

CsvTraceSink::CsvTraceSink(const std::string& path) : out_(path) {
  if (!out_) {
    throw SimError(ErrorCode::InvalidConfig,
                   "cannot open trace file " + path);
  }
  out_ << "cycle,event,node_x,node_y,port_or_slot,packet_id,flit_ordinal,"
          "detail\n";
}

void CsvTraceSink::record(const TraceRecord& r) {
  out_ << r.cycle << ',' << r.event << ',' << unsigned(r.node_x) << ','
       << unsigned(r.node_y) << ',' << r.port_or_slot << ',';
  if (r.packet) out_ << *r.packet;
  out_ << ',';
  if (r.flit_ordinal) out_ << *r.flit_ordinal;
  out_ << ',' << r.detail << '\n';
}

uint32_t PacketBook::open(const Message& msg, uint64_t inject_cycle,
                          uint16_t flits) {
  // Packet 0 is reserved as "untagged" so tag-free flits never alias a row.
  uint32_t id = static_cast<uint32_t>(records_.size()) + 1;
  PacketRecord rec;
  rec.packet = id;
  rec.msg = msg;
  rec.inject_cycle = inject_cycle;
  rec.flits = flits;
  records_.push_back(std::move(rec));
  return id;
}

void PacketBook::mark_delivered(uint32_t packet, uint64_t cycle) {
  if (packet == 0 || packet > records_.size()) return;  // untagged traffic
  records_[packet - 1].delivered_cycle = cycle;
}

const PacketRecord& PacketBook::at(uint32_t packet) const {
  if (packet == 0 || packet > records_.size()) {
    throw SimError(ErrorCode::SimulationFault, "unknown packet record");
  }
  return records_[packet - 1];
}

}  // namespace vnoc
