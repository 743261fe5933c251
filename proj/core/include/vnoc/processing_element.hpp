#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vnoc/packet.hpp"
#include "vnoc/trace.hpp"

namespace vnoc {

// Cost model knobs plus the region reconfiguration time.
struct ServiceModelParams {
  uint32_t gcd_base = 4;
  uint32_t gcd_per_iter = 8;
  uint32_t rsa_base = 4;
  uint32_t rsa_mult_cost = 16;
  uint64_t t_recfg = 100000;
};

enum class ServiceKernel : uint8_t { Gcd, Rsa };

struct ServiceEntry {
  std::string name;
  ServiceKernel kernel = ServiceKernel::Gcd;
  uint32_t base = 0;
  uint32_t per_op = 0;
};

// Maps PE type codes to service behaviour. Codes are dense indices, which is
// also what travels in MapReq payloads.
class ServiceCatalog {
public:
  static ServiceCatalog standard(const ServiceModelParams& p);

  PEType register_type(ServiceEntry entry);
  const ServiceEntry& at(PEType t) const;
  std::optional<PEType> find(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }

private:
  std::vector<ServiceEntry> entries_;
};

// Number of modulo steps Euclid's algorithm takes until the remainder hits
// zero: gcd_iterations(48, 18) == 3, gcd_iterations(x, 0) == 0.
uint32_t gcd_iterations(uint32_t a, uint32_t b);
// Multiplications of left-to-right square and multiply: bitlen(e) +
// popcount(e) - 2, and 0 for e <= 1.
uint32_t rsa_op_count(uint32_t e);

// Service time of one request on a PE of type `t`; validates payload arity.
uint64_t service_cycles(PEType t, std::span<const uint32_t> payload,
                        const ServiceCatalog& catalog);
// The actual answer the PE computes (Euclid / square-and-multiply).
uint32_t pe_compute(PEType t, std::span<const uint32_t> payload,
                    const ServiceCatalog& catalog);

// One processing element instance living inside a configured region: two
// request queues (one per slot), a single execution unit, first-come
// first-served across both queues by arrival cycle with slot 0 breaking
// ties.
class PEState {
public:
  PEState(MeshCoordinate node, PEType type, uint32_t queue_capacity)
      : node_(node), type_(type), queue_capacity_(queue_capacity) {}

  PEType type() const { return type_; }
  MeshCoordinate node() const { return node_; }

  bool accepts(SlotId slot) const {
    return queues_[slot].size() < queue_capacity_;
  }
  void enqueue(SlotId slot, Message msg, uint64_t now);

  // Finish work due at `now`, then start the next queued request. Returns at
  // most one reply to send; when `can_send` is false the reply is parked and
  // handed out on a later call.
  std::optional<Message> step(uint64_t now, const ServiceCatalog& catalog,
                              bool can_send, TraceSink* trace);

  bool busy() const { return exec_.has_value(); }
  std::size_t queued(SlotId slot) const { return queues_[slot].size(); }
  bool drained() const {
    return !exec_ && queues_[0].empty() && queues_[1].empty() &&
           parked_replies_.empty();
  }
  uint64_t busy_cycles() const { return busy_cycles_; }
  uint64_t served() const { return served_; }

private:
  struct Queued {
    Message msg;
    uint64_t arrival;
  };
  struct Exec {
    Message request;
    SlotId slot;
    uint32_t result;
    uint64_t started;
    uint64_t finish_at;
  };

  MeshCoordinate node_;
  PEType type_;
  uint32_t queue_capacity_;
  std::array<std::deque<Queued>, 2> queues_{};
  std::optional<Exec> exec_;
  std::deque<Message> parked_replies_;
  uint64_t busy_cycles_ = 0;
  uint64_t served_ = 0;
};

// A partially reconfigurable region: at any moment it is empty, loading a
// bitstream, or hosting a live PEState.
struct PRRState {
  enum class Status : uint8_t { Empty, Reconfiguring, Configured };

  MeshCoordinate node;
  uint32_t queue_capacity = 4;
  Status status = Status::Empty;
  std::optional<PEType> pe_type;  // target while loading, current when live
  uint64_t ready_at = 0;
  std::optional<PEState> pe;
  uint64_t reconfig_count = 0;
  uint64_t busy_cycles_total = 0;
  uint64_t served_total = 0;

  bool drained() const { return !pe || pe->drained(); }
};

// Begin loading a new bitstream. Refuses while a load is already running or
// while the current PE still has work in flight.
void prr_reconfigure(PRRState& prr, PEType type, uint64_t now,
                     uint64_t t_recfg, TraceSink* trace);
// Advance the load timer; returns true the cycle the region comes alive.
bool prr_tick(PRRState& prr, uint64_t now, TraceSink* trace);

}  // namespace vnoc
