#include <benchmark/benchmark.h>

#include "obda/bench.hpp"
#include "obda/oracle.hpp"
#include "obda/unfold.hpp"

namespace {

struct Fixture {
  obda::DataInstance data = obda::gen_wisconsin(5000, 4, 23);
  obda::GridCell cell = obda::gen_grid(obda::GridPoint{20, 4, 1, 3});
};

Fixture &fixture() {
  static Fixture f;
  return f;
}

}  // namespace

static void BM_eval_flat_translation(benchmark::State &state) {
  Fixture &f = fixture();
  auto u = obda::unfold_ucq(f.cell.query, f.cell.mappings);
  for (auto _ : state) {
    obda::OpCounters c;
    auto answers =
        obda::eval_ucq_translation(u, f.cell.mappings.views, f.data, c);
    benchmark::DoNotOptimize(answers.size());
  }
}
BENCHMARK(BM_eval_flat_translation);

static void BM_eval_grouped_translation(benchmark::State &state) {
  Fixture &f = fixture();
  auto t2 =
      obda::unfold_jucq_type2(f.cell.query, f.cell.jucq_cover, f.cell.mappings);
  for (auto _ : state) {
    obda::OpCounters c;
    auto answers = obda::eval_type2(t2, f.data, c);
    benchmark::DoNotOptimize(answers.size());
  }
}
BENCHMARK(BM_eval_grouped_translation);

static void BM_collect_statistics(benchmark::State &state) {
  Fixture &f = fixture();
  for (auto _ : state) {
    auto stats = obda::collect(f.cell.mappings, obda::TBox{}, f.data);
    benchmark::DoNotOptimize(stats.view_card.size());
  }
}
BENCHMARK(BM_collect_statistics);
