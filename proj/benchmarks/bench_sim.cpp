// Micro benchmarks for the hot paths: wire codec, per-cycle engine step
// (idle and under load), and a whole default-config run end to end.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>

#include "vnoc/config.hpp"
#include "vnoc/harness.hpp"
#include "vnoc/packet.hpp"
#include "vnoc/sim.hpp"

namespace {

using namespace vnoc;

void BM_PacketRoundTrip(benchmark::State& state) {
  Message m;
  m.kind = MessageKind::ComputeReq;
  m.id = 42;
  m.src = {{0, 1}, kSlot0};
  m.dst = {{2, 1}, kSlot1};
  m.payload.assign(std::size_t(state.range(0)), 0x12345678u);
  for (auto _ : state) {
    auto flits = encode_packet(m);
    auto back = decode_packet(flits);
    benchmark::DoNotOptimize(back);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PacketRoundTrip)->Arg(0)->Arg(8)->Arg(64);

void BM_MeshStepIdle(benchmark::State& state) {
  SimPlan plan;
  plan.width = uint8_t(state.range(0));
  plan.height = uint8_t(state.range(0));
  plan.mode = Mode::Baseline;
  plan.tag_packets = false;
  Simulation sim(std::move(plan));
  for (auto _ : state) sim.step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MeshStepIdle)->Arg(4)->Arg(8)->Arg(16);

void BM_MeshStepLoaded(benchmark::State& state) {
  const uint8_t side = uint8_t(state.range(0));
  SimPlan plan;
  plan.width = side;
  plan.height = side;
  plan.mode = Mode::Baseline;
  plan.tag_packets = false;
  Simulation sim(std::move(plan));
  std::mt19937_64 rng(99);
  for (auto _ : state) {
    for (uint8_t y = 0; y < side; ++y) {
      for (uint8_t x = 0; x < side; ++x) {
        if (rng() % 4 != 0) continue;
        MeshCoordinate src{x, y};
        if (sim.ni_at(src).send_free() == 0) continue;
        MeshCoordinate dst{uint8_t(rng() % side), uint8_t(rng() % side)};
        if (dst == src) continue;
        Message m;
        m.kind = MessageKind::ComputeReq;
        m.src = {src, kSlot0};
        m.dst = {dst, kSlot0};
        m.payload.assign(rng() % 9, 0xC0DEu);
        sim.inject(src, m);
      }
    }
    sim.step();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MeshStepLoaded)->Arg(4)->Arg(8);

void BM_DefaultRun(benchmark::State& state) {
  auto cfg = parse_config_file(std::string(VNOC_CONFIG_DIR) + "/default.json");
  cfg.mode = state.range(0) == 0 ? Mode::Baseline : Mode::Vnoc;
  cfg.tag_packets = false;
  for (auto _ : state) {
    auto stats = run_once(cfg);
    benchmark::DoNotOptimize(stats.makespan);
  }
}
BENCHMARK(BM_DefaultRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
