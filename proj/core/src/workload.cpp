#include "vnoc/workload.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

namespace vnoc {

std::vector<TaskSpec> generate_workload(uint32_t n_tasks, WorkloadMix mix,
                                        uint32_t requests_per_task,
                                        uint64_t think_cycles,
                                        const std::vector<uint64_t>& arrivals,
                                        uint64_t seed) {
  if (!arrivals.empty() && arrivals.size() != n_tasks) {
    throw SimError(ErrorCode::SemanticError,
                   "arrival list has " + std::to_string(arrivals.size()) +
                       " entries for " + std::to_string(n_tasks) + " tasks");
  }
  std::vector<TaskSpec> specs;
  specs.reserve(n_tasks);
  uint64_t state = seed;
  for (uint32_t i = 0; i < n_tasks; ++i) {
    TaskSpec s;
    s.task_id = i;
    switch (mix) {
      case WorkloadMix::GcdOnly: s.pe_type = kPETypeGcd; break;
      case WorkloadMix::RsaOnly: s.pe_type = kPETypeRsa; break;
      case WorkloadMix::Mixed:
        s.pe_type = (i % 2 == 0) ? kPETypeGcd : kPETypeRsa;
        break;
    }
    s.num_requests = requests_per_task;
    s.think_cycles = think_cycles;
    s.arrival_cycle = arrivals.empty() ? 0 : arrivals[i];
    s.operand_seed = splitmix64_next(state);
    specs.push_back(s);
  }
  return specs;
}

std::vector<uint32_t> next_operands(OperandGen& gen, ServiceKernel kernel,
                                    const OperandConfig& cfg) {
  if (kernel == ServiceKernel::Gcd) {
    if (cfg.fixed_gcd) return {(*cfg.fixed_gcd)[0], (*cfg.fixed_gcd)[1]};
    // Odd operands keep zero out of the stream without skewing much else.
    uint32_t a = static_cast<uint32_t>(splitmix64_next(gen.state)) | 1u;
    uint32_t b = static_cast<uint32_t>(splitmix64_next(gen.state)) | 1u;
    return {a, b};
  }
  if (cfg.fixed_rsa) {
    return {(*cfg.fixed_rsa)[0], (*cfg.fixed_rsa)[1], (*cfg.fixed_rsa)[2]};
  }
  uint32_t m = static_cast<uint32_t>(splitmix64_next(gen.state)) %
               cfg.rsa_modulus;
  return {m, cfg.rsa_exponent, cfg.rsa_modulus};
}

uint32_t verify_gcd(uint32_t a, uint32_t b) { return std::gcd(a, b); }

// Right-to-left binary exponentiation: a different route to the same answer
// than the PE's left-to-right kernel.
uint32_t verify_modpow(uint32_t m, uint32_t e, uint32_t n) {
  if (n == 0) {
    throw SimError(ErrorCode::SimulationFault, "rsa modulus is zero");
  }
  if (n == 1) return 0;
  uint64_t result = 1;
  uint64_t base = m % n;
  uint32_t exp = e;
  while (exp > 0) {
    if (exp & 1u) result = result * base % n;
    base = base * base % n;
    exp >>= 1;
  }
  return static_cast<uint32_t>(result);
}

TaskHost::TaskHost(TaskSpec spec, MeshCoordinate host_node,
                   VirtualAddress manager, ServiceKernel kernel,
                   OperandConfig operands)
    : spec_(spec),
      host_node_(host_node),
      manager_(manager),
      kernel_(kernel),
      operand_cfg_(std::move(operands)),
      gen_{spec.operand_seed} {}

std::optional<Message> TaskHost::tick(uint64_t now) {
  if (phase_ == TaskPhase::Dormant && now >= spec_.arrival_cycle) {
    phase_ = TaskPhase::AwaitingGrant;
    start_cycle_ = now;
    Message m;
    m.kind = MessageKind::MapReq;
    m.src = {host_node_, kSlot0};
    m.dst = manager_;
    m.payload = {spec_.task_id, spec_.pe_type.code};
    return m;
  }
  if (phase_ == TaskPhase::Thinking && now >= think_until_ &&
      issued_ < spec_.num_requests) {
    return make_request(now);
  }
  return std::nullopt;
}

Message TaskHost::make_request(uint64_t now) {
  (void)now;
  outstanding_ = next_operands(gen_, kernel_, operand_cfg_);
  ++issued_;
  phase_ = TaskPhase::AwaitingReply;
  awaiting_id_.reset();
  Message m;
  m.kind = MessageKind::ComputeReq;
  m.src = {host_node_, kSlot0};
  m.dst = *assigned_;
  m.payload = outstanding_;
  return m;
}

void TaskHost::note_request_id(uint16_t id, uint64_t now) {
  awaiting_id_ = id;
  issue_cycle_ = now;
}

bool TaskHost::wants(const Message& m) const {
  switch (m.kind) {
    case MessageKind::MapGrant:
      return phase_ == TaskPhase::AwaitingGrant && m.payload.size() == 4 &&
             m.payload[0] == spec_.task_id;
    case MessageKind::ComputeRep:
      return phase_ == TaskPhase::AwaitingReply && awaiting_id_ &&
             m.payload.size() == 2 && m.payload[0] == *awaiting_id_;
    case MessageKind::ReleaseAck:
      return phase_ == TaskPhase::Releasing && m.payload.size() == 1 &&
             m.payload[0] == spec_.task_id;
    default:
      return false;
  }
}

std::optional<Message> TaskHost::deliver(const Message& m, uint64_t now) {
  if (!wants(m)) {
    throw SimError(ErrorCode::UnexpectedMessage,
                   std::string("task ") + std::to_string(spec_.task_id) +
                       " cannot take " + message_kind_name(m.kind) +
                       " in its current phase");
  }
  switch (m.kind) {
    case MessageKind::MapGrant: {
      assigned_ = VirtualAddress{
          {static_cast<uint8_t>(m.payload[1]),
           static_cast<uint8_t>(m.payload[2])},
          static_cast<SlotId>(m.payload[3])};
      if (spec_.num_requests == 0) {
        phase_ = TaskPhase::Releasing;
        Message rel;
        rel.kind = MessageKind::Release;
        rel.src = {host_node_, kSlot0};
        rel.dst = manager_;
        rel.payload = {spec_.task_id};
        return rel;
      }
      phase_ = TaskPhase::Thinking;
      think_until_ = now + spec_.think_cycles;
      return std::nullopt;
    }
    case MessageKind::ComputeRep: {
      uint32_t expected =
          kernel_ == ServiceKernel::Gcd
              ? verify_gcd(outstanding_[0], outstanding_[1])
              : verify_modpow(outstanding_[0], outstanding_[1],
                              outstanding_[2]);
      if (m.payload[1] != expected) {
        throw SimError(ErrorCode::ResultMismatch,
                       "task " + std::to_string(spec_.task_id) +
                           " expected " + std::to_string(expected) +
                           " but the fabric answered " +
                           std::to_string(m.payload[1]));
      }
      uint64_t lat = now - issue_cycle_;
      latency_sum_ += lat;
      latency_max_ = std::max(latency_max_, lat);
      ++completed_;
      awaiting_id_.reset();
      if (completed_ == spec_.num_requests) {
        phase_ = TaskPhase::Releasing;
        Message rel;
        rel.kind = MessageKind::Release;
        rel.src = {host_node_, kSlot0};
        rel.dst = manager_;
        rel.payload = {spec_.task_id};
        return rel;
      }
      phase_ = TaskPhase::Thinking;
      think_until_ = now + spec_.think_cycles;
      return std::nullopt;
    }
    case MessageKind::ReleaseAck: {
      phase_ = TaskPhase::Done;
      finish_cycle_ = now;
      return std::nullopt;
    }
    default:
      throw SimError(ErrorCode::UnexpectedMessage, "unreachable");
  }
}

}  // namespace vnoc
