#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vnoc/config.hpp"

namespace vnoc {

struct TaskStats {
  uint32_t task = 0;
  std::string type_name;
  uint32_t issued = 0;
  uint32_t completed = 0;
  uint64_t start = 0;
  uint64_t finish = 0;
  double mean_request_latency = 0.0;
  uint64_t max_request_latency = 0;
};

struct RegionStats {
  uint8_t x = 0;
  uint8_t y = 0;
  uint64_t reconfigs = 0;
  uint64_t busy_cycles = 0;
  uint64_t served = 0;
  uint64_t virtualized_cycles = 0;
};

struct RunStats {
  std::string digest;
  std::string mode;
  uint64_t seed = 0;
  uint64_t makespan = 0;
  uint64_t cycles = 0;
  uint64_t flits_injected = 0;
  uint64_t packets = 0;
  double mean_packet_latency = 0.0;
  std::array<uint64_t, 5> decisions{};  // assign, enable, reconfig, evict,
                                        // queued
  std::vector<TaskStats> tasks;
  std::vector<RegionStats> regions;
};

// Build the world a config describes, run it to completion, gather stats.
RunStats run_once(const SimConfig& cfg);

// Stable JSON rendering of a stats record (field order fixed, so identical
// runs serialise byte for byte identically).
std::string stats_to_json(const RunStats& s);
RunStats stats_from_json(const std::string& text);

struct SweepRow {
  uint32_t n = 0;
  uint64_t baseline_makespan = 0;
  uint64_t vnoc_makespan = 0;
  double speedup = 0.0;
};

// For each task count, run the same world in both modes with the same seed
// and record baseline/vnoc makespans. Points run concurrently; tracing is
// disabled inside sweeps.
std::vector<SweepRow> run_sweep(const SimConfig& base,
                                const std::vector<uint32_t>& task_counts);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// Speedup of run `b` relative to run `a` (a.makespan / b.makespan). The two
// runs must digest identically — same world, same seed — or this throws
// ConfigMismatch.
double compare_speedup(const RunStats& a, const RunStats& b);

}  // namespace vnoc
