#include <benchmark/benchmark.h>

#include "generators.hpp"

using namespace dgmm;

static void BM_Ingest(benchmark::State& state) {
  test::GistGenerator gen(1);
  std::vector<Gist> gists;
  for (int i = 0; i < 4096; ++i) gists.push_back(gen.next());
  MemoryGraph g;
  std::size_t i = 0;
  for (auto _ : state) {
    if (i == gists.size()) {
      state.PauseTiming();
      g = MemoryGraph();
      i = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(ingest(g, gists[i++]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Ingest);

static void BM_ConsolidationPass(benchmark::State& state) {
  test::GistGenerator gen(2, {.elements = 10, .concepts = 5});
  MemoryGraph base;
  for (int i = 0; i < state.range(0); ++i) {
    Gist gist = gen.next();
    ingest(base, gist);
    ingest(base, gen.variant_of(gist));
  }
  for (auto _ : state) {
    state.PauseTiming();
    MemoryGraph g = base;
    state.ResumeTiming();
    benchmark::DoNotOptimize(consolidation_pass(g, {.generalize_times = true}));
  }
}
BENCHMARK(BM_ConsolidationPass)->Arg(100)->Arg(1000);
