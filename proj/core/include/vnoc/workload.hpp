#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vnoc/packet.hpp"
#include "vnoc/processing_element.hpp"

namespace vnoc {

// splitmix64; the canonical constants, so streams are reproducible across
// implementations.
inline constexpr uint64_t splitmix64_next(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum class WorkloadMix : uint8_t { GcdOnly, RsaOnly, Mixed };

struct TaskSpec {
  uint32_t task_id = 0;
  PEType pe_type;
  uint32_t num_requests = 1;
  uint64_t think_cycles = 0;
  uint64_t arrival_cycle = 0;
  uint64_t operand_seed = 0;
};

// Tasks alternate GCD/RSA under Mixed; task i draws the i-th splitmix64
// output of `seed` as its private operand stream seed.
std::vector<TaskSpec> generate_workload(uint32_t n_tasks, WorkloadMix mix,
                                        uint32_t requests_per_task,
                                        uint64_t think_cycles,
                                        const std::vector<uint64_t>& arrivals,
                                        uint64_t seed);

struct OperandConfig {
  std::optional<std::array<uint32_t, 2>> fixed_gcd;
  std::optional<std::array<uint32_t, 3>> fixed_rsa;
  uint32_t rsa_modulus = 3233;
  uint32_t rsa_exponent = 65537;
};

struct OperandGen {
  uint64_t state = 0;
};

// Draw the operand words of one request. Fixed operands bypass the
// generator entirely.
std::vector<uint32_t> next_operands(OperandGen& gen, ServiceKernel kernel,
                                    const OperandConfig& cfg);

// Independent checks for what a PE should have answered; used by hosts to
// validate every reply. Deliberately separate code paths from the PE
// kernels (std::gcd; right-to-left exponentiation).
uint32_t verify_gcd(uint32_t a, uint32_t b);
uint32_t verify_modpow(uint32_t m, uint32_t e, uint32_t n);

enum class TaskPhase : uint8_t {
  Dormant,
  AwaitingGrant,
  Thinking,
  AwaitingReply,
  Releasing,
  Done,
};

// The software side of one task: request a PE, then loop think / compute /
// verify until the request budget is spent, release, done. One message in
// flight at a time.
class TaskHost {
public:
  TaskHost(TaskSpec spec, MeshCoordinate host_node, VirtualAddress manager,
           ServiceKernel kernel, OperandConfig operands);

  // Timer transitions. At most one message out per call; the caller
  // enqueues it and, for compute requests, reports the stamped id back via
  // note_request_id.
  std::optional<Message> tick(uint64_t now);
  void note_request_id(uint16_t id, uint64_t now);

  // Would this inbound message belong to this task right now?
  bool wants(const Message& m) const;
  std::optional<Message> deliver(const Message& m, uint64_t now);

  TaskPhase phase() const { return phase_; }
  bool done() const { return phase_ == TaskPhase::Done; }
  const TaskSpec& spec() const { return spec_; }
  std::optional<VirtualAddress> assigned() const { return assigned_; }
  uint32_t issued() const { return issued_; }
  uint32_t completed() const { return completed_; }
  uint64_t start_cycle() const { return start_cycle_; }
  uint64_t finish_cycle() const { return finish_cycle_; }
  uint64_t latency_sum() const { return latency_sum_; }
  uint64_t latency_max() const { return latency_max_; }

private:
  Message make_request(uint64_t now);

  TaskSpec spec_;
  MeshCoordinate host_node_;
  VirtualAddress manager_;
  ServiceKernel kernel_;
  OperandConfig operand_cfg_;
  OperandGen gen_;
  TaskPhase phase_ = TaskPhase::Dormant;
  std::optional<VirtualAddress> assigned_;
  uint64_t think_until_ = 0;
  std::optional<uint16_t> awaiting_id_;
  std::vector<uint32_t> outstanding_;
  uint64_t issue_cycle_ = 0;
  uint32_t issued_ = 0;
  uint32_t completed_ = 0;
  uint64_t start_cycle_ = 0;
  uint64_t finish_cycle_ = 0;
  uint64_t latency_sum_ = 0;
  uint64_t latency_max_ = 0;
};

}  // namespace vnoc
