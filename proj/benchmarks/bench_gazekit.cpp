#include <benchmark/benchmark.h>

#include <vector>

#include "gazekit/classifier.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/reticle.hpp"
#include "gazekit/sim.hpp"
#include "gazekit/stats.hpp"
#include "gazekit/task.hpp"

using namespace gazekit;

namespace {

BlockConfig block_for(Condition c) {
  BlockConfig b;
  b.condition = c;
  return b;
}

const SimulatedSession& sample_session() {
  static const SimulatedSession s = [] {
    SimConfig sim;
    sim.seed = 17;
    sim.dropout_rate = 0.02;
    return simulate_session(block_for(Condition::StickyMagnetic), sim);
  }();
  return s;
}

}  // namespace

// One engine step per frame of a real block, all heuristics on.
static void BM_EngineStep(benchmark::State& state) {
  const SimulatedSession& s = sample_session();
  const BlockConfig block = block_for(Condition::StickyMagnetic);
  std::vector<GazeSample> samples;
  for (const FrameRow& f : s.log.frames) samples.push_back({f.t_ms, {f.gaze_x_m, f.gaze_y_m}, f.valid});
  for (auto _ : state) {
    ReticleEngine engine(block.layout_for_round(0), HeuristicConfig::for_condition(Condition::StickyMagnetic));
    for (const GazeSample& g : samples) benchmark::DoNotOptimize(engine.step(g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_EngineStep);

static void BM_SimulateSession(benchmark::State& state) {
  SimConfig sim;
  std::uint64_t seed = 1;
  const BlockConfig block = block_for(Condition::StickyMagnetic);
  for (auto _ : state) {
    sim.seed = seed++;
    benchmark::DoNotOptimize(simulate_session(block, sim));
  }
  state.SetItemsProcessed(state.iterations() * block.total_trials());
}
BENCHMARK(BM_SimulateSession)->Unit(benchmark::kMillisecond);

static void BM_ClassifySession(benchmark::State& state) {
  const SimulatedSession& s = sample_session();
  for (auto _ : state) benchmark::DoNotOptimize(classify_session(s.log));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.log.selections.size()));
}
BENCHMARK(BM_ClassifySession)->Unit(benchmark::kMicrosecond);

static void BM_ReplaySession(benchmark::State& state) {
  const SimulatedSession& s = sample_session();
  for (auto _ : state) benchmark::DoNotOptimize(replay_session(s.log));
}
BENCHMARK(BM_ReplaySession)->Unit(benchmark::kMicrosecond);

static void BM_SessionMetrics(benchmark::State& state) {
  const SimulatedSession& s = sample_session();
  const BlockConfig block = block_for(Condition::StickyMagnetic);
  for (auto _ : state) benchmark::DoNotOptimize(session_metrics(s.log.selections, block));
}
BENCHMARK(BM_SessionMetrics);

// subjects x conditions
static void BM_RmAnova(benchmark::State& state) {
  const auto subjects = static_cast<std::size_t>(state.range(0));
  const auto conditions = static_cast<std::size_t>(state.range(1));
  Rng rng(Rng::derive(3, kTagSubject, 0));
  std::vector<std::vector<double>> values(subjects, std::vector<double>(conditions));
  for (auto& row : values) {
    for (double& v : row) v = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(rm_anova(values));
}
BENCHMARK(BM_RmAnova)->Args({9, 4})->Args({9, 3})->Args({100, 8});

static void BM_PairedT(benchmark::State& state) {
  Rng rng(Rng::derive(4, kTagSubject, 0));
  std::vector<double> x(9), y(9);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(paired_t(x, y));
}
BENCHMARK(BM_PairedT);

BENCHMARK_MAIN();
