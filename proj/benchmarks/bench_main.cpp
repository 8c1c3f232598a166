#include <benchmark/benchmark.h>

#include <vector>

#include "treemorph/experiment.hpp"
#include "treemorph/metrics.hpp"
#include "treemorph/ops.hpp"
#include "treemorph/planner.hpp"
#include "treemorph/protocol.hpp"
#include "treemorph/prufer.hpp"
#include "treemorph/rng.hpp"
#include "treemorph/spatial.hpp"
#include "treemorph/tree.hpp"

namespace {

using namespace treemorph;

void BM_PruferEncode(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(1);
  const LabeledTree t = random_tree(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(prufer_encode(t));
  }
}
BENCHMARK(BM_PruferEncode)->Arg(15)->Arg(60)->Arg(240);

void BM_PruferDecode(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(1);
  const PruferSequence seq = prufer_encode(random_tree(n, rng)).attachments;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prufer_decode(seq));
  }
}
BENCHMARK(BM_PruferDecode)->Arg(15)->Arg(60)->Arg(240);

void BM_ApplyLeafTransfer(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) edges.push_back({v, v + 1});
  const LabeledTree path = LabeledTree::from_edges(n, edges);
  const LeafTransfer op{1, 2, 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(treemorph::apply(path, op));
  }
}
BENCHMARK(BM_ApplyLeafTransfer)->Arg(15)->Arg(60)->Arg(240);

void BM_Lambda2Tree(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(2);
  const LabeledTree t = random_tree(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lambda2_of_tree(t));
  }
}
BENCHMARK(BM_Lambda2Tree)->Arg(15)->Arg(60)->Arg(240);

void BM_PlanTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(3);
  const LabeledTree a = random_tree(n, rng);
  const LabeledTree b = random_tree(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_transform(a, b));
  }
}
BENCHMARK(BM_PlanTransform)->Arg(15)->Arg(60)->Arg(240);

void BM_ProtocolRound(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(4);
  const LabeledTree t = random_tree(n, rng);
  for (auto _ : state) {
    state.PauseTiming();
    ProtocolEngine engine(t, Protocol::kLine, 7);
    state.ResumeTiming();
    benchmark::DoNotOptimize(engine.step_round());
  }
}
BENCHMARK(BM_ProtocolRound)->Arg(15)->Arg(60)->Arg(240);

void BM_CoverageArea(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RangeConfig ranges;
  SplitMix64 rng(5);
  const std::vector<Vec2> positions = sample_connected_world(n, ranges, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coverage_area(positions, ranges));
  }
}
BENCHMARK(BM_CoverageArea)->Arg(15)->Arg(60)->Arg(240);

void BM_SimulationStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RangeConfig ranges;
  SplitMix64 rng(6);
  std::vector<Vec2> positions = sample_connected_world(n, ranges, rng);
  const LabeledTree tree = random_spanning_tree(positions, ranges.r_range, rng);
  SpatialWorld world(std::move(positions), tree, ranges, 0, {});
  for (auto _ : state) {
    world.hold_steps(1);
  }
}
BENCHMARK(BM_SimulationStep)->Arg(15)->Arg(60)->Arg(240);

}  // namespace

BENCHMARK_MAIN();
