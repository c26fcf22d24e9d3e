#include <benchmark/benchmark.h>

#include "generators.hpp"

using namespace dgmm;

namespace {

MemoryGraph store_of(int n) {
  test::GistGenerator gen(4);
  MemoryGraph g;
  test::ingest_random(g, gen, n);
  return g;
}

Cue cue_e1() {
  Cue cue;
  cue.elements = {"e1"};
  return cue;
}

}  // namespace

static void BM_Embed(benchmark::State& state) {
  auto g = store_of(2000);
  auto w = recall(g, cue_e1());
  EmbeddingParams params{.rounds = static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(embed(w, params));
  state.counters["nodes"] = static_cast<double>(w.nodes.size());
}
BENCHMARK(BM_Embed)->Arg(1)->Arg(2)->Arg(4);

static void BM_Surprise(benchmark::State& state) {
  auto g = store_of(2000);
  auto op = state.range(0) ? DivergenceOperator::embedding : DivergenceOperator::neighborhood;
  for (auto _ : state) benchmark::DoNotOptimize(surprise(g, cue_e1(), 1000, 2000, {.op = op}));
}
BENCHMARK(BM_Surprise)->Arg(0)->Arg(1);
