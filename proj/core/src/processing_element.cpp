#include "vnoc/processing_element.hpp"

#include <bit>
#include <string>
#include <utility>

namespace vnoc {

ServiceCatalog ServiceCatalog::standard(const ServiceModelParams& p) {
  ServiceCatalog c;
  c.register_type({"GCD", ServiceKernel::Gcd, p.gcd_base, p.gcd_per_iter});
  c.register_type({"RSA", ServiceKernel::Rsa, p.rsa_base, p.rsa_mult_cost});
  return c;
}

PEType ServiceCatalog::register_type(ServiceEntry entry) {
  entries_.push_back(std::move(entry));
  return PEType{static_cast<uint8_t>(entries_.size() - 1)};
}

const ServiceEntry& ServiceCatalog::at(PEType t) const {
  if (t.code >= entries_.size()) {
    throw SimError(ErrorCode::UnknownPEType,
                   "no service registered for type code " +
                       std::to_string(t.code));
  }
  return entries_[t.code];
}

std::optional<PEType> ServiceCatalog::find(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return PEType{static_cast<uint8_t>(i)};
  }
  return std::nullopt;
}

uint32_t gcd_iterations(uint32_t a, uint32_t b) {
  uint32_t n = 0;
  while (b != 0) {
    uint32_t r = a % b;
    a = b;
    b = r;
    ++n;
  }
  return n;
}

uint32_t rsa_op_count(uint32_t e) {
  if (e <= 1) return 0;
  return std::bit_width(e) + std::popcount(e) - 2;
}

namespace {

void check_arity(ServiceKernel k, std::size_t got) {
  std::size_t want = k == ServiceKernel::Gcd ? 2 : 3;
  if (got != want) {
    throw SimError(ErrorCode::ArityMismatch,
                   "request carries " + std::to_string(got) +
                       " operands, kernel needs " + std::to_string(want));
  }
}

uint32_t euclid_gcd(uint32_t a, uint32_t b) {
  while (b != 0) {
    uint32_t r = a % b;
    a = b;
    b = r;
  }
  return a;
}

// Left-to-right square and multiply; products stay below 2^64 because the
// modulus is a 32 bit value.
uint32_t modpow(uint32_t m, uint32_t e, uint32_t n) {
  if (n == 0) {
    throw SimError(ErrorCode::SimulationFault, "rsa modulus is zero");
  }
  if (n == 1) return 0;
  uint64_t base = m % n;
  if (e == 0) return 1 % n;
  uint64_t acc = base;
  for (int i = std::bit_width(e) - 2; i >= 0; --i) {
    acc = acc * acc % n;
    if ((e >> i) & 1u) acc = acc * base % n;
  }
  return static_cast<uint32_t>(acc);
}

}  // namespace

uint64_t service_cycles(PEType t, std::span<const uint32_t> payload,
                        const ServiceCatalog& catalog) {
  const ServiceEntry& e = catalog.at(t);
  check_arity(e.kernel, payload.size());
  uint64_t ops = e.kernel == ServiceKernel::Gcd
                     ? gcd_iterations(payload[0], payload[1])
                     : rsa_op_count(payload[1]);
  return e.base + static_cast<uint64_t>(e.per_op) * ops;
}

uint32_t pe_compute(PEType t, std::span<const uint32_t> payload,
                    const ServiceCatalog& catalog) {
  const ServiceEntry& e = catalog.at(t);
  check_arity(e.kernel, payload.size());
  return e.kernel == ServiceKernel::Gcd
             ? euclid_gcd(payload[0], payload[1])
             : modpow(payload[0], payload[1], payload[2]);
}

void PEState::enqueue(SlotId slot, Message msg, uint64_t now) {
  if (slot > kSlot1) {
    throw SimError(ErrorCode::IllegalTransition, "no such slot");
  }
  if (queues_[slot].size() >= queue_capacity_) {
    throw SimError(ErrorCode::QueueFull,
                   "request queue for slot " + std::to_string(slot) +
                       " is full");
  }
  queues_[slot].push_back(Queued{std::move(msg), now});
}

std::optional<Message> PEState::step(uint64_t now,
                                     const ServiceCatalog& catalog,
                                     bool can_send, TraceSink* trace) {
  std::optional<Message> reply;

  if (exec_ && now >= exec_->finish_at) {
    Message rep;
    rep.kind = MessageKind::ComputeRep;
    rep.src = {node_, exec_->slot};
    rep.dst = exec_->request.src;
    rep.payload = {exec_->request.id, exec_->result};
    parked_replies_.push_back(std::move(rep));
    busy_cycles_ += exec_->finish_at - exec_->started;
    ++served_;
    if (trace) {
      TraceRecord r;
      r.cycle = now;
      r.event = "SVC_END";
      r.node_x = node_.x;
      r.node_y = node_.y;
      r.port_or_slot = std::to_string(exec_->slot);
      r.detail = "req=" + std::to_string(exec_->request.id) +
                 " result=" + std::to_string(exec_->result);
      trace->record(r);
    }
    exec_.reset();
  }

  if (can_send && !parked_replies_.empty()) {
    reply = std::move(parked_replies_.front());
    parked_replies_.pop_front();
  }

  if (!exec_) {
    // First come first served across both slots; the arrival stamp is the
    // cycle the request reached this node, and slot 0 wins ties.
    int pick = -1;
    uint64_t best = 0;
    for (SlotId s = 0; s < 2; ++s) {
      if (queues_[s].empty()) continue;
      uint64_t arr = queues_[s].front().arrival;
      if (pick < 0 || arr < best) {
        pick = s;
        best = arr;
      }
    }
    if (pick >= 0) {
      Queued q = std::move(queues_[pick].front());
      queues_[pick].pop_front();
      uint64_t s_cycles =
          service_cycles(type_, q.msg.payload, catalog);
      uint32_t result = pe_compute(type_, q.msg.payload, catalog);
      exec_ = Exec{std::move(q.msg), static_cast<SlotId>(pick), result, now,
                   now + s_cycles};
      if (trace) {
        TraceRecord r;
        r.cycle = now;
        r.event = "SVC_START";
        r.node_x = node_.x;
        r.node_y = node_.y;
        r.port_or_slot = std::to_string(pick);
        r.detail = "req=" + std::to_string(exec_->request.id) +
                   " cycles=" + std::to_string(s_cycles);
        trace->record(r);
      }
    }
  }
  return reply;
}

void prr_reconfigure(PRRState& prr, PEType type, uint64_t now,
                     uint64_t t_recfg, TraceSink* trace) {
  if (prr.status == PRRState::Status::Reconfiguring) {
    throw SimError(ErrorCode::RegionBusy, "region is already loading");
  }
  if (prr.pe && !prr.pe->drained()) {
    throw SimError(ErrorCode::RegionBusy,
                   "refusing to reload a region with work in flight");
  }
  if (prr.pe) {
    prr.busy_cycles_total += prr.pe->busy_cycles();
    prr.served_total += prr.pe->served();
    prr.pe.reset();
  }
  prr.status = PRRState::Status::Reconfiguring;
  prr.pe_type = type;
  prr.ready_at = now + t_recfg;
  ++prr.reconfig_count;
  if (trace) {
    TraceRecord r;
    r.cycle = now;
    r.event = "RECFG_START";
    r.node_x = prr.node.x;
    r.node_y = prr.node.y;
    r.detail = "type=" + std::to_string(type.code) +
               " ready_at=" + std::to_string(prr.ready_at);
    trace->record(r);
  }
}

bool prr_tick(PRRState& prr, uint64_t now, TraceSink* trace) {
  if (prr.status != PRRState::Status::Reconfiguring || now < prr.ready_at) {
    return false;
  }
  prr.status = PRRState::Status::Configured;
  prr.pe.emplace(prr.node, *prr.pe_type, prr.queue_capacity);
  if (trace) {
    TraceRecord r;
    r.cycle = now;
    r.event = "RECFG_END";
    r.node_x = prr.node.x;
    r.node_y = prr.node.y;
    r.detail = "type=" + std::to_string(prr.pe_type->code);
    trace->record(r);
  }
  return true;
}

}  // namespace vnoc
