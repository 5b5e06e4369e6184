#include <benchmark/benchmark.h>

#include "obda/bench.hpp"
#include "obda/unfold.hpp"

static void BM_unfold_flat(benchmark::State &state) {
  obda::GridCell cell = obda::gen_grid(
      obda::GridPoint{20, static_cast<int>(state.range(0)), 0, 3});
  for (auto _ : state) {
    auto u = obda::unfold_ucq(cell.query, cell.mappings);
    benchmark::DoNotOptimize(u.rules.size());
  }
}
BENCHMARK(BM_unfold_flat)->Arg(2)->Arg(4)->Arg(6);

static void BM_unfold_grouped(benchmark::State &state) {
  obda::GridCell cell = obda::gen_grid(
      obda::GridPoint{20, static_cast<int>(state.range(0)), 0, 3});
  for (auto _ : state) {
    auto t2 =
        obda::unfold_jucq_type2(cell.query, cell.jucq_cover, cell.mappings);
    benchmark::DoNotOptimize(t2.query.rules.size());
  }
}
BENCHMARK(BM_unfold_grouped)->Arg(2)->Arg(4)->Arg(6);
