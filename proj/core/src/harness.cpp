#include "vnoc/harness.hpp"

#include <cstdio>
#include <future>
#include <memory>

#include "json.hpp"

namespace vnoc {

using ordered_json = nlohmann::ordered_json;

RunStats run_once(const SimConfig& cfg) {
  SimPlan plan = to_plan(cfg);
  Simulation sim(std::move(plan));
  std::unique_ptr<CsvTraceSink> sink;
  if (!cfg.trace_path.empty()) {
    sink = std::make_unique<CsvTraceSink>(cfg.trace_path);
    sim.set_trace(sink.get());
  }
  sim.run();

  RunStats s;
  s.digest = config_digest_hex(cfg);
  s.mode = cfg.mode == Mode::Baseline ? "baseline" : "vnoc";
  s.seed = cfg.seed;
  s.makespan = sim.makespan();
  s.cycles = sim.cycle();
  s.flits_injected = sim.flits_injected();

  const auto& book = sim.packets();
  uint64_t delivered = 0;
  uint64_t latency_total = 0;
  for (const auto& rec : book.records()) {
    if (!rec.delivered_cycle) continue;
    ++delivered;
    latency_total += *rec.delivered_cycle - rec.inject_cycle;
  }
  s.packets = book.records().size();
  s.mean_packet_latency =
      delivered ? double(latency_total) / double(delivered) : 0.0;

  const ServiceCatalog& catalog = sim.plan().catalog;
  for (const auto& t : sim.tasks()) {
    TaskStats ts;
    ts.task = t.spec().task_id;
    ts.type_name = catalog.at(t.spec().pe_type).name;
    ts.issued = t.issued();
    ts.completed = t.completed();
    ts.start = t.start_cycle();
    ts.finish = t.finish_cycle();
    ts.mean_request_latency =
        t.completed() ? double(t.latency_sum()) / double(t.completed()) : 0.0;
    ts.max_request_latency = t.latency_max();
    s.tasks.push_back(std::move(ts));
  }

  for (const auto& prr : sim.regions()) {
    RegionStats rs;
    rs.x = prr.node.x;
    rs.y = prr.node.y;
    rs.reconfigs = prr.reconfig_count;
    rs.busy_cycles =
        prr.busy_cycles_total + (prr.pe ? prr.pe->busy_cycles() : 0);
    rs.served = prr.served_total + (prr.pe ? prr.pe->served() : 0);
    if (const GlobalManager* mgr = sim.manager()) {
      for (const auto& e : mgr->directory()) {
        if (e.node == prr.node) rs.virtualized_cycles = e.virtualized_cycles;
      }
    }
    s.regions.push_back(rs);
  }

  if (GlobalManager* mgr = sim.manager()) {
    s.decisions = mgr->decision_counts();
  }
  return s;
}

std::string stats_to_json(const RunStats& s) {
  ordered_json j;
  j["digest"] = s.digest;
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  j["makespan"] = s.makespan;
  j["cycles"] = s.cycles;
  j["flits_injected"] = s.flits_injected;
  j["packets"] = s.packets;
  j["mean_packet_latency"] = s.mean_packet_latency;
  j["decisions"] = {{"assign", s.decisions[0]},
                    {"enable_then_assign", s.decisions[1]},
                    {"reconfig_then_assign", s.decisions[2]},
                    {"evict_then_assign", s.decisions[3]},
                    {"queued", s.decisions[4]}};
  ordered_json tasks = ordered_json::array();
  for (const auto& t : s.tasks) {
    ordered_json tj;
    tj["task"] = t.task;
    tj["type"] = t.type_name;
    tj["issued"] = t.issued;
    tj["completed"] = t.completed;
    tj["start"] = t.start;
    tj["finish"] = t.finish;
    tj["mean_request_latency"] = t.mean_request_latency;
    tj["max_request_latency"] = t.max_request_latency;
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  ordered_json regions = ordered_json::array();
  for (const auto& r : s.regions) {
    ordered_json rj;
    rj["node"] = {r.x, r.y};
    rj["reconfigs"] = r.reconfigs;
    rj["busy_cycles"] = r.busy_cycles;
    rj["served"] = r.served;
    rj["virtualized_cycles"] = r.virtualized_cycles;
    regions.push_back(std::move(rj));
  }
  j["regions"] = std::move(regions);
  return j.dump(2) + "\n";
}

RunStats stats_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw SimError(ErrorCode::SchemaError,
                   std::string("stats file is not valid JSON: ") + e.what());
  }
  RunStats s;
  try {
    s.digest = j.at("digest").get<std::string>();
    s.mode = j.at("mode").get<std::string>();
    s.seed = j.at("seed").get<uint64_t>();
    s.makespan = j.at("makespan").get<uint64_t>();
    if (j.contains("cycles")) s.cycles = j.at("cycles").get<uint64_t>();
  } catch (const ordered_json::exception& e) {
    throw SimError(ErrorCode::SchemaError,
                   std::string("stats file is missing fields: ") + e.what());
  }
  return s;
}

std::vector<SweepRow> run_sweep(const SimConfig& base,
                                const std::vector<uint32_t>& task_counts) {
  struct Point {
    std::future<RunStats> baseline;
    std::future<RunStats> vnoc;
  };
  std::vector<Point> points;
  points.reserve(task_counts.size());
  for (uint32_t n : task_counts) {
    if (n == 0) {
      throw SimError(ErrorCode::SemanticError,
                     "sweep task counts must be positive");
    }
    SimConfig cb = base;
    cb.workload.tasks = n;
    cb.workload.arrivals.clear();
    cb.trace_path.clear();
    cb.mode = Mode::Baseline;
    SimConfig cv = cb;
    cv.mode = Mode::Vnoc;
    points.push_back(Point{
        std::async(std::launch::async, [cb] { return run_once(cb); }),
        std::async(std::launch::async, [cv] { return run_once(cv); })});
  }
  std::vector<SweepRow> rows;
  rows.reserve(task_counts.size());
  for (std::size_t i = 0; i < task_counts.size(); ++i) {
    SweepRow row;
    row.n = task_counts[i];
    row.baseline_makespan = points[i].baseline.get().makespan;
    row.vnoc_makespan = points[i].vnoc.get().makespan;
    if (row.vnoc_makespan == 0) {
      throw SimError(ErrorCode::SimulationFault,
                     "virtualized run finished with zero makespan");
    }
    row.speedup = double(row.baseline_makespan) / double(row.vnoc_makespan);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "n,baseline_makespan,vnoc_makespan,speedup\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%u,%llu,%llu,%.4f\n", r.n,
                  static_cast<unsigned long long>(r.baseline_makespan),
                  static_cast<unsigned long long>(r.vnoc_makespan),
                  r.speedup);
    out += buf;
  }
  return out;
}

double compare_speedup(const RunStats& a, const RunStats& b) {
  if (a.digest != b.digest) {
    throw SimError(ErrorCode::ConfigMismatch,
                   "runs describe different worlds (digest " + a.digest +
                       " vs " + b.digest + ")");
  }
  if (b.makespan == 0) {
    throw SimError(ErrorCode::SimulationFault,
                   "cannot compare against a zero makespan");
  }
  return double(a.makespan) / double(b.makespan);
}

}  // namespace vnoc
