#include <benchmark/benchmark.h>

#include "generators.hpp"

using namespace dgmm;

namespace {

MemoryGraph store_of(int n) {
  test::GistGenerator gen(3);
  MemoryGraph g;
  test::ingest_random(g, gen, n);
  return g;
}

}  // namespace

static void BM_RecallElements(benchmark::State& state) {
  auto g = store_of(static_cast<int>(state.range(0)));
  Cue cue;
  cue.elements = {"e1", "e2", "e3"};
  cue.min_element_overlap = 2;
  for (auto _ : state) benchmark::DoNotOptimize(recall(g, cue));
}
BENCHMARK(BM_RecallElements)->Arg(1000)->Arg(10000);

static void BM_RecallTimeWindow(benchmark::State& state) {
  auto g = store_of(static_cast<int>(state.range(0)));
  Cue cue;
  cue.from = parse_instant("2020-01-10");
  cue.to = parse_instant("2020-01-20");
  for (auto _ : state) benchmark::DoNotOptimize(recall(g, cue));
}
BENCHMARK(BM_RecallTimeWindow)->Arg(1000)->Arg(10000);

static void BM_RecallPinnedVersion(benchmark::State& state) {
  auto g = store_of(2000);
  Cue cue;
  cue.source_name = "s1";
  for (auto _ : state) benchmark::DoNotOptimize(recall(g, cue, 1000));
}
BENCHMARK(BM_RecallPinnedVersion);
