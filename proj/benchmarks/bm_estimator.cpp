#include <benchmark/benchmark.h>

#include "obda/bench.hpp"
#include "obda/estimator.hpp"
#include "obda/planner.hpp"
#include "obda/unfold.hpp"

namespace {

struct Fixture {
  obda::DataInstance data = obda::gen_wisconsin(2000, 6, 17);
  obda::GridCell cell = obda::gen_grid(obda::GridPoint{20, 6, 2, 3});
  obda::StatsCatalog stats =
      obda::collect(cell.mappings, obda::TBox{}, data);
  obda::MappingSet wrapped = obda::wrap(cell.mappings);
  obda::TemplateGroups groups = obda::template_groups(cell.mappings);
};

Fixture &fixture() {
  static Fixture f;
  return f;
}

}  // namespace

static void BM_estimate_flat_unfolding(benchmark::State &state) {
  Fixture &f = fixture();
  obda::UnfoldedQuery flat = obda::unfold_ucq(f.cell.query, f.cell.mappings);
  for (auto _ : state) {
    obda::EstimationContext ctx(f.stats, f.groups);
    auto est = obda::estimate_unfolding(flat, f.cell.mappings.views, ctx);
    benchmark::DoNotOptimize(est.value);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(flat.rules.size()));
}
BENCHMARK(BM_estimate_flat_unfolding);

static void BM_estimate_wrapped_unfolding(benchmark::State &state) {
  Fixture &f = fixture();
  obda::UnfoldedQuery u = obda::unfold_ucq(f.cell.query, f.wrapped);
  for (auto _ : state) {
    obda::EstimationContext ctx(f.stats, f.groups);
    auto est = obda::estimate_unfolding(u, f.wrapped.views, ctx);
    benchmark::DoNotOptimize(est.value);
  }
}
BENCHMARK(BM_estimate_wrapped_unfolding);

static void BM_plan_grid_cell(benchmark::State &state) {
  Fixture &f = fixture();
  for (auto _ : state) {
    auto plans = obda::plan(f.cell.query, f.cell.mappings, obda::TBox{},
                            f.stats, obda::CostConstants{}, 3);
    benchmark::DoNotOptimize(plans.size());
  }
}
BENCHMARK(BM_plan_grid_cell);

BENCHMARK_MAIN();
