// Command line front end: run one config, sweep task counts in both modes,
// or compare two stats files. Exit codes: 0 success, 1 usage, 2 bad config,
// 3 simulation fault, 4 watchdog.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vnoc/harness.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw vnoc::SimError(vnoc::ErrorCode::InvalidConfig,
                         "cannot open " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) {
    throw vnoc::SimError(vnoc::ErrorCode::InvalidConfig,
                         "cannot write " + out_path);
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle level simulator of a virtualized NoC based "
               "reconfigurable fabric"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode_override;
  std::optional<uint64_t> seed_override;
  std::string out_path;
  std::string trace_override;

  CLI::App* run = app.add_subcommand("run", "Run one configuration");
  run->add_option("--config", config_path, "Config JSON file")->required();
  run->add_option("--mode", mode_override, "Override mode")
      ->check(CLI::IsMember({"baseline", "vnoc"}));
  run->add_option("--seed", seed_override, "Override workload seed");
  run->add_option("--out", out_path, "Stats JSON destination (default stdout)");
  run->add_option("--trace", trace_override, "Trace CSV destination");

  std::vector<uint32_t> sweep_tasks{2, 4, 6, 8};
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run baseline and vnoc over several task counts");
  sweep->add_option("--config", config_path, "Config JSON file")->required();
  sweep->add_option("--tasks", sweep_tasks, "Task counts")
      ->delimiter(',');
  sweep->add_option("--out", out_path, "CSV destination (default stdout)");

  std::string stats_a, stats_b;
  CLI::App* compare = app.add_subcommand(
      "compare", "Speedup of the second run relative to the first");
  compare->add_option("reference", stats_a, "Reference stats JSON (e.g. baseline)")
      ->required();
  compare->add_option("candidate", stats_b, "Candidate stats JSON (e.g. vnoc)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help and friends
    }
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) {
      vnoc::SimConfig cfg = vnoc::parse_config_file(config_path);
      if (mode_override == "baseline") cfg.mode = vnoc::Mode::Baseline;
      if (mode_override == "vnoc") cfg.mode = vnoc::Mode::Vnoc;
      if (seed_override) cfg.seed = *seed_override;
      if (!trace_override.empty()) cfg.trace_path = trace_override;
      vnoc::RunStats stats = vnoc::run_once(cfg);
      emit(vnoc::stats_to_json(stats), out_path);
    } else if (sweep->parsed()) {
      vnoc::SimConfig cfg = vnoc::parse_config_file(config_path);
      auto rows = vnoc::run_sweep(cfg, sweep_tasks);
      emit(vnoc::sweep_to_csv(rows), out_path);
    } else if (compare->parsed()) {
      vnoc::RunStats a = vnoc::stats_from_json(slurp(stats_a));
      vnoc::RunStats b = vnoc::stats_from_json(slurp(stats_b));
      double speedup = vnoc::compare_speedup(a, b);
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "reference_makespan=%llu candidate_makespan=%llu "
                    "speedup=%.4f\n",
                    static_cast<unsigned long long>(a.makespan),
                    static_cast<unsigned long long>(b.makespan), speedup);
      std::cout << buf;
    }
  } catch (const vnoc::SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return vnoc::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
