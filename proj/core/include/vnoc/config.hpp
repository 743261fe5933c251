#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vnoc/sim.hpp"

namespace vnoc {

// Parsed, defaulted, validated run description. Field order here is also
// the canonical serialisation order used for the digest.
struct SimConfig {
  uint8_t width = 3;
  uint8_t height = 3;
  uint32_t buffer_depth = 4;
  Mode mode = Mode::Vnoc;
  Policy policy = Policy::ReconfigFirst;
  MeshCoordinate manager{0, 0};
  std::vector<MeshCoordinate> hosts;
  struct Region {
    MeshCoordinate node;
    std::optional<std::string> initial_type;
  };
  std::vector<Region> regions;
  ServiceModelParams service;
  struct ExtraType {
    std::string name;
    ServiceKernel kernel = ServiceKernel::Gcd;
    uint32_t base = 1;
    uint32_t per_op = 0;
  };
  std::vector<ExtraType> extra_types;
  uint32_t pe_queue_depth = 4;
  struct Workload {
    uint32_t tasks = 4;
    WorkloadMix mix = WorkloadMix::Mixed;
    uint32_t requests = 32;
    uint64_t think = 200;
    std::vector<uint64_t> arrivals;
    OperandConfig operands;
  } workload;
  uint64_t seed = 1;
  uint64_t watchdog = 50'000'000;
  bool tag_packets = true;
  std::string trace_path;  // empty = tracing off; excluded from the digest
};

// Strict parse: unknown keys, wrong types and malformed enum strings are
// SchemaError; in-range but inconsistent values are SemanticError.
SimConfig parse_config(const std::string& json_text);
SimConfig parse_config_file(const std::string& path);

// Canonical minified serialisation of everything that defines behaviour:
// mode and trace destination are excluded, so a baseline/vnoc pair over the
// same world digests identically.
std::string canonical_config_json(const SimConfig& cfg);
uint64_t config_digest(const SimConfig& cfg);
std::string config_digest_hex(const SimConfig& cfg);

// Materialise the runnable plan (catalog, task specs, placements).
SimPlan to_plan(const SimConfig& cfg);

// FNV-1a over arbitrary bytes; exposed for tests.
uint64_t fnv1a64(const void* data, std::size_t len);

}  // namespace vnoc
