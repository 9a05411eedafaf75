#include <benchmark/benchmark.h>

#include "stablewalk/ladder.hpp"
#include "stablewalk/limit_laws.hpp"
#include "stablewalk/rng.hpp"
#include "stablewalk/stable.hpp"
#include "stablewalk/walk.hpp"

namespace {

using namespace stablewalk;

void BM_NormalIncrement(benchmark::State& state) {
  const Stable st(2.0, 0.0, 0.5);
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(st.sample(rng));
  }
}
BENCHMARK(BM_NormalIncrement);

void BM_StableIncrement15(benchmark::State& state) {
  const Stable st(1.5, 0.3, 1.0);
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(st.sample(rng));
  }
}
BENCHMARK(BM_StableIncrement15);

void BM_KilledWalk(benchmark::State& state) {
  const Stable st(2.0, 0.0, 0.5);
  Rng rng(2);
  const auto n = state.range(0);
  for (auto _ : state) {
    double s = 0.0;
    std::int64_t i = 0;
    for (; i < n; ++i) {
      s += st.sample(rng);
      if (s < 0.0) break;
    }
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KilledWalk)->Arg(256)->Arg(4096);

void BM_DensityEval(benchmark::State& state) {
  const Stable st(1.5, 0.3, 1.0);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(st.density(x));
    x += 1e-3;
    if (x > 4.0) x = 0.0;
  }
}
BENCHMARK(BM_DensityEval);

void BM_RenewalEval(benchmark::State& state) {
  const Stable st(2.0, 0.0, 0.5);
  static const RenewalTable table =
      build_renewal_table(st, Direction::descending, 500, 64, 256, 7);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.eval(x));
    x += 0.01;
    if (x > 40.0) x = 0.0;
  }
}
BENCHMARK(BM_RenewalEval);

void BM_BalancedWindowLimit(benchmark::State& state) {
  const Stable st(2.0, 0.0, 0.5);
  const auto gplus = MeanderDensity::rayleigh(st.c());
  const double css = 1.0 / std::sqrt(M_PI * st.c());
  double y = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(limit_r2(st, gplus, css, 1.0, 1.0, y));
    y += 0.1;
    if (y > 0.9) y = 0.1;
  }
}
BENCHMARK(BM_BalancedWindowLimit);

}  // namespace

BENCHMARK_MAIN();
