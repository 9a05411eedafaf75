#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "stablewalk/errors.hpp"
#include "stablewalk/ladder.hpp"

using namespace stablewalk;
namespace fs = std::filesystem;

TEST_CASE("ladder samples are monotone and deterministic") {
  const Stable st(2.0, 0.0, 0.5);
  const auto lad = simulate_ladder(st, Direction::descending, 32, 1001);
  const auto lad2 = simulate_ladder(st, Direction::descending, 32, 1001);
  CHECK(lad.epochs == lad2.epochs);
  CHECK(lad.heights == lad2.heights);
  if (!lad.truncated) {
    REQUIRE(lad.epochs.size() == 32);
  }
  for (std::size_t i = 0; i + 1 < lad.epochs.size(); ++i) {
    CHECK(lad.epochs[i] < lad.epochs[i + 1]);
    CHECK(lad.heights[i] <= lad.heights[i + 1]);
  }
  for (const double h : lad.heights) CHECK(h >= 0.0);

  const auto asc = simulate_ladder(st, Direction::ascending, 16, 1002);
  for (const double h : asc.heights) CHECK(h >= 0.0);
}

TEST_CASE("first ladder height is never exactly zero") {
  // Continuous increments: weak and strict ladders coincide almost surely.
  const Stable st(1.5, 0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto lad = simulate_ladder(st, Direction::descending, 1, seed);
    REQUIRE(lad.heights.size() >= 1);
    CHECK(lad.heights[0] > 0.0);
  }
}

TEST_CASE("renewal table evaluation and exact integrals on a hand table") {
  RenewalTable t;
  t.dir = Direction::descending;
  t.grid = {1.0};
  t.values = {2.0};
  t.stderrs = {0.0};
  t.exponent_fit = 1.0;

  CHECK(t.eval(-0.5) == 0.0);
  CHECK(t.eval(0.0) == 1.0);
  CHECK(t.eval(0.5) == doctest::Approx(1.5));   // linear from (0,1) to (1,2)
  CHECK(t.eval(1.0) == doctest::Approx(2.0));
  CHECK(t.eval(2.0) == doctest::Approx(4.0));   // power-law tail, slope 1

  CHECK(t.integral_to(1.0) == doctest::Approx(1.5).epsilon(1e-12));
  // int_1^2 2x dx = 3, so the running integral at 2 is 4.5.
  CHECK(t.integral_to(2.0) == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(t.integral_to(0.0) == doctest::Approx(0.0));
}

TEST_CASE("estimated renewal table: normalization, growth, exponent") {
  const Stable st(2.0, 0.0, 0.5);
  const auto table =
      build_renewal_table(st, Direction::descending, 4000, 64, 1024, 555);

  CHECK(table.eval(0.0) == 1.0);
  for (std::size_t i = 0; i + 1 < table.grid.size(); ++i) {
    CHECK(table.values[i] <= table.values[i + 1] + 1e-12);
  }
  CHECK(table.values.front() >= 1.0);

  // Gaussian walk: both ladder renewal functions grow linearly.
  CHECK(std::abs(table.exponent_fit - 1.0) <= 0.1);
  const double x = st.a(256);
  CHECK(table.eval(2.0 * x) / table.eval(x) == doctest::Approx(2.0).epsilon(0.2));

  // Extrapolation beyond the grid is continuous at the boundary.
  const double edge = table.grid.back();
  CHECK(table.eval(edge * 1.0001) ==
        doctest::Approx(table.values.back()).epsilon(0.02));
}

TEST_CASE("renewal table csv round trip") {
  const Stable st(2.0, 0.0, 0.5);
  const auto table =
      build_renewal_table(st, Direction::ascending, 1000, 64, 256, 777);
  const auto dir = fs::temp_directory_path() / "stablewalk_test_renewal";
  fs::create_directories(dir);
  const auto path = (dir / "table.csv").string();
  table.save_csv(path);
  const auto loaded = RenewalTable::load_csv(path);
  CHECK(loaded.dir == table.dir);
  CHECK(loaded.params.alpha == table.params.alpha);
  CHECK(loaded.params.beta == table.params.beta);
  CHECK(loaded.params.c == table.params.c);
  CHECK(loaded.grid == table.grid);
  CHECK(loaded.values == table.values);
  CHECK(loaded.stderrs == table.stderrs);
  CHECK(loaded.exponent_fit == table.exponent_fit);
  CHECK(loaded.depth == table.depth);
  CHECK(loaded.n_walks == table.n_walks);

  // Saving the loaded table reproduces the file byte for byte.
  const auto path2 = (dir / "table2.csv").string();
  loaded.save_csv(path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());
}

TEST_CASE("severe ladder truncation is refused") {
  // Depth 4 cannot support the series tail rule at any reasonable grid.
  const Stable st(1.5, 0.0, 1.0);
  std::vector<LadderSample> samples;
  for (std::uint64_t i = 0; i < 300; ++i) {
    samples.push_back(simulate_ladder(st, Direction::descending, 4, 9000 + i));
  }
  const auto grid = default_renewal_grid(st, 1024);
  CHECK_THROWS_AS(estimate_renewal(st, Direction::descending, samples, grid),
                  TruncationTooSevere);
}

TEST_CASE("meander histogram: normalization and Gaussian limit shape") {
  const Stable st(2.0, 0.0, 0.5);
  const auto est =
      estimate_meander_density(st, Direction::ascending, 512, 3000, 2024);
  CHECK(est.sample_size == 3000);
  double mass = est.overflow_mass;
  for (const double m : est.masses) {
    CHECK(m >= 0.0);
    mass += m;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  // Against the Rayleigh limit cdf 1 - exp(-z^2 / (4c)) on mid-range edges.
  double cum = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < est.masses.size(); ++i) {
    cum += est.masses[i];
    const double z = est.edges[i + 1];
    if (z < 0.2 || z > 3.0) continue;
    const double ref = 1.0 - std::exp(-z * z / (4.0 * st.c()));
    worst = std::max(worst, std::abs(cum - ref));
  }
  INFO("max cdf deviation ", worst);
  CHECK(worst < 0.05);

  // First moment of the Rayleigh with sigma^2 = 2c = 1: sqrt(pi/2).
  double err = 0.0;
  const double m1 = est.integral_zpow(1.0, &err);
  CHECK(std::abs(m1 - std::sqrt(M_PI / 2.0)) < 0.08 + 4.0 * err);
}

TEST_CASE("ladder epoch survival matches the square-root law") {
  const Stable st(2.0, 0.0, 0.5);
  const auto surv = estimate_epoch_survival(st, Direction::descending,
                                            {64, 256, 1024}, 200000, 31);
  REQUIRE(surv.prob.size() == 3);
  CHECK(surv.prob[0] > surv.prob[1]);
  CHECK(surv.prob[1] > surv.prob[2]);
  // sqrt(n) P(tau > n) -> 1/sqrt(pi) = 0.5642 for the symmetric walk.
  const double scaled = surv.prob[2] * std::sqrt(1024.0);
  INFO("sqrt(n) P(tau > n) = ", scaled);
  CHECK(std::abs(scaled - 0.5642) < 0.04);
}

TEST_CASE("harmonicity residual: estimated table passes, corrupted fails") {
  const Stable st(2.0, 0.0, 0.5);
  const auto vminus =
      build_renewal_table(st, Direction::descending, 4000, 64, 256, 661);

  for (const std::int64_t n : {1LL, 64LL}) {
    const auto hr = harmonicity_residual(st, vminus, n, 120000, 662);
    INFO("n = ", n, " residual ", hr.residual, " se ", hr.se);
    CHECK(std::abs(hr.residual) <= 3.5 * hr.se);
  }

  RenewalTable bad = vminus;
  for (std::size_t i = bad.grid.size() / 2; i < bad.grid.size(); ++i) {
    bad.values[i] *= 1.2;
  }
  const auto hr = harmonicity_residual(st, bad, 64, 120000, 663);
  CHECK(std::abs(hr.residual) > 3.0 * hr.se);
}

TEST_CASE("occupation sums and their tails are coherent") {
  const Stable st(2.0, 0.0, 0.5);
  const auto occ = estimate_occupation_sum(st, st.a(64), 256, {128}, 40000, 41);
  CHECK(occ.total > 1.0);  // j = 0 contributes 1 whenever x >= 0
  REQUIRE(occ.tail_sums.size() == 1);
  CHECK(occ.tail_sums[0] >= 0.0);
  CHECK(occ.tail_sums[0] < occ.total);
}
