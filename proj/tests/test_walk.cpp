#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "stablewalk/ladder.hpp"
#include "stablewalk/rng.hpp"
#include "stablewalk/walk.hpp"

using namespace stablewalk;

TEST_CASE("simulate_path shape and determinism") {
  const Stable st(1.5, 0.3, 1.0);
  const auto p1 = simulate_path(st, 0.5, 100, 77);
  const auto p2 = simulate_path(st, 0.5, 100, 77);
  const auto p3 = simulate_path(st, 0.5, 100, 78);
  CHECK(p1.s.size() == 101);
  CHECK(p1.s[0] == 0.5);
  CHECK(p1.s == p2.s);
  CHECK(p1.s != p3.s);
}

TEST_CASE("window functionals agree with a straight scan") {
  const Stable st(2.0, 0.0, 0.5);
  const auto path = simulate_path(st, 1.0, 50, 4242);
  const std::int64_t r = 13, n = 50;
  const auto wf = window_functionals(path, r, n);

  double lmin = path.s[static_cast<std::size_t>(r)];
  std::int64_t argmin = r;
  for (std::int64_t i = r; i <= n; ++i) {
    const double v = path.s[static_cast<std::size_t>(i)];
    if (v < lmin) {
      lmin = v;
      argmin = i;
    }
  }
  double mx = path.s[1];
  for (std::int64_t i = 1; i <= n; ++i) {
    mx = std::max(mx, path.s[static_cast<std::size_t>(i)]);
  }
  CHECK(wf.l_rn == lmin);
  CHECK(wf.tau_rn == argmin);
  CHECK(wf.m_n == mx);
  CHECK(wf.endpoint == path.s.back());

  CHECK_THROWS_AS(window_functionals(path, 30, 20), WindowOutOfRange);
  CHECK_THROWS_AS(window_functionals(path, 0, 51), WindowOutOfRange);
  CHECK_THROWS_AS(window_functionals(path, -1, 50), WindowOutOfRange);
}

TEST_CASE("conditioning event indicator") {
  WalkPath p;
  p.w = 0.0;
  p.s = {0.0, 0.4, 0.2, 0.9};
  CHECK(event_holds(p, ConditioningEvent{1.0, 3}));
  CHECK_FALSE(event_holds(p, ConditioningEvent{0.5, 3}));  // endpoint too high
  p.s[2] = -0.01;
  CHECK_FALSE(event_holds(p, ConditioningEvent{1.0, 3}));  // dips below zero
}

TEST_CASE("rejection sampler: exact draws, unit weights, determinism") {
  const Stable st(2.0, 0.0, 0.5);
  SamplerConfig cfg;
  cfg.target = 400;
  cfg.seed = 99;
  cfg.window_starts = {64, 192};
  const ConditioningEvent ev{st.a(16), 256};  // x = 4, n = 256

  const auto s1 = sample_conditioned_rejection(st, 0.0, ev, cfg);
  CHECK(s1.paths.size() == 400);
  CHECK(s1.ess == doctest::Approx(400.0));
  CHECK(s1.attempts > 400u);
  CHECK(s1.acceptance_rate > 0.0);
  CHECK(s1.acceptance_rate < 0.05);
  CHECK_FALSE(s1.shortfall);
  for (const auto& p : s1.paths) {
    CHECK(p.weight == 1.0);
    CHECK(p.endpoint <= ev.x);
    CHECK(p.win.size() == 2);
    CHECK(p.win[0].l >= 0.0);          // survivors never go negative
    CHECK(p.win[0].l <= p.win[1].l + 1e-12);  // wider window, smaller min
    CHECK(p.win[0].tau >= 64);
    CHECK(p.win[1].tau >= 192);
  }

  const auto s2 = sample_conditioned_rejection(st, 0.0, ev, cfg);
  REQUIRE(s2.paths.size() == s1.paths.size());
  for (std::size_t i = 0; i < s1.paths.size(); ++i) {
    CHECK(s1.paths[i].endpoint == s2.paths[i].endpoint);
    CHECK(s1.paths[i].win[0].tau == s2.paths[i].win[0].tau);
  }
}

TEST_CASE("rejection sampler shortfall handling") {
  const Stable st(2.0, 0.0, 0.5);
  SamplerConfig cfg;
  cfg.target = 1000;
  cfg.max_attempts = 200;  // far too few for this event
  cfg.seed = 7;
  const ConditioningEvent ev{0.5, 512};

  cfg.throw_on_shortfall = false;
  const auto s = sample_conditioned_rejection(st, 0.0, ev, cfg);
  CHECK(s.shortfall);
  CHECK(s.paths.size() < 1000);

  cfg.throw_on_shortfall = true;
  try {
    sample_conditioned_rejection(st, 0.0, ev, cfg);
    FAIL("expected BudgetExhausted");
  } catch (const BudgetExhausted& e) {
    CHECK(e.partial_sample.shortfall);
    CHECK(e.partial_sample.paths.size() < 1000);
  }
}

TEST_CASE("sampler input validation") {
  const Stable st(2.0, 0.0, 0.5);
  SamplerConfig cfg;
  cfg.target = 10;
  CHECK_THROWS_AS(
      sample_conditioned_rejection(st, -0.1, ConditioningEvent{1.0, 16}, cfg),
      DomainError);
  CHECK_THROWS_AS(
      sample_conditioned_rejection(st, 0.0, ConditioningEvent{-1.0, 16}, cfg),
      DomainError);
  CHECK_THROWS_AS(
      sample_conditioned_rejection(st, 0.0, ConditioningEvent{1.0, 0}, cfg),
      DomainError);
  SamplerConfig bad = cfg;
  bad.window_starts = {20};
  CHECK_THROWS_AS(
      sample_conditioned_rejection(st, 0.0, ConditioningEvent{1.0, 16}, bad),
      WindowOutOfRange);
}

TEST_CASE("weighted empirical cdf on a hand sample") {
  ConditionedSample s;
  s.method = SamplerMethod::htransform;
  s.window_starts = {};
  PathSummary p1{0.5, 1.0, 1.0, 1.0, {}};
  PathSummary p2{2.0, 2.5, 3.0, 3.0, {}};
  s.paths = {p1, p2};
  s.ess = 16.0 / 10.0;

  const auto cdf = empirical_conditional_cdf(s, Functional::endpoint, -1, 1.0,
                                             {1.0, 2.0});
  REQUIRE(cdf.values.size() == 2);
  CHECK(cdf.values[0] == doctest::Approx(0.25));
  CHECK(cdf.values[1] == doctest::Approx(1.0));
  CHECK(cdf.ess == doctest::Approx(1.6));
  // stderr at F = 0.25 with ess 1.6: sqrt(0.25 * 0.75 / 1.6).
  CHECK(cdf.stderrs[0] == doctest::Approx(std::sqrt(0.25 * 0.75 / 1.6)));

  ConditionedSample empty;
  CHECK_THROWS_AS(empirical_conditional_cdf(empty, Functional::endpoint, -1,
                                            1.0, {1.0}),
                  EmptySample);
  CHECK_THROWS_AS(
      empirical_conditional_cdf(s, Functional::endpoint, -1, 1.0, {}),
      GridMismatch);
  CHECK_THROWS_AS(
      empirical_conditional_cdf(s, Functional::endpoint, -1, 0.0, {1.0}),
      DomainError);
}

TEST_CASE("importance sampler agrees with rejection on bounded functionals") {
  const Stable st(2.0, 0.0, 0.5);
  const std::int64_t n = 256;
  const auto vminus =
      build_renewal_table(st, Direction::descending, 1500, 64, n, 31415);

  // Moderate endpoint cut: about two thirds of surviving walks pass, so the
  // importance weights stay healthy while the cut is still binding.
  const ConditioningEvent ev{1.5 * st.a(static_cast<double>(n)), n};
  SamplerConfig cfg;
  cfg.target = 800;
  cfg.seed = 555;
  cfg.window_starts = {128};

  const auto rej = sample_conditioned_rejection(st, 0.0, ev, cfg);
  cfg.seed = 556;
  const auto imp = sample_conditioned_htransform(st, 0.0, ev, vminus, cfg);
  CHECK(imp.ess > 80.0);  // a tenth of target is the degeneracy floor

  // A cut this tight starves the importance weights instead: nearly all
  // h-transformed paths end far above x, so the sampler must refuse.
  CHECK_THROWS_AS(sample_conditioned_htransform(
                      st, 0.0, ConditioningEvent{st.a(16), n}, vminus, cfg),
                  DegenerateWeights);

  // Weighted means of bounded path functionals under the two samplers.
  const auto wmean = [](const ConditionedSample& s, auto&& f) {
    double num = 0.0, den = 0.0, num2 = 0.0;
    for (const auto& p : s.paths) {
      const double v = f(p);
      num += p.weight * v;
      den += p.weight;
      num2 += p.weight * v * v;
    }
    const double m = num / den;
    const double var = std::max(num2 / den - m * m, 0.0);
    return std::pair<double, double>(m, std::sqrt(var / std::max(s.ess, 1.0)));
  };
  const auto fe = [&](const PathSummary& p) { return p.endpoint / ev.x; };
  const auto fl = [&](const PathSummary& p) {
    return p.win[0].l / st.a(static_cast<double>(n));
  };
  for (const auto& f :
       {std::function<double(const PathSummary&)>(fe),
        std::function<double(const PathSummary&)>(fl)}) {
    const auto [m1, se1] = wmean(rej, f);
    const auto [m2, se2] = wmean(imp, f);
    const double sigma = std::hypot(se1, se2);
    INFO("means ", m1, " vs ", m2, " sigma ", sigma);
    CHECK(std::abs(m1 - m2) < 4.0 * sigma);
  }
}

TEST_CASE("importance sampler h-weights average to one over free paths") {
  // With no endpoint cut (x huge) every proposal is kept, and the
  // harmonic-transform weights must integrate the proposal back to the
  // surviving-walk measure: E[prod Z * V(S_n)/V(w)] = 1 when V is harmonic.
  const Stable st(2.0, 0.0, 0.5);
  const std::int64_t n = 64;
  const auto vminus =
      build_renewal_table(st, Direction::descending, 2000, 64, n, 2718);
  SamplerConfig cfg;
  cfg.target = 4000;
  cfg.seed = 606;
  const ConditioningEvent ev{1e18, n};
  const auto s = sample_conditioned_htransform(st, 0.0, ev, vminus, cfg);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : s.paths) {
    sum += p.weight_h;
    sum2 += p.weight_h * p.weight_h;
  }
  const double nn = static_cast<double>(s.paths.size());
  const double mean = sum / nn;
  const double se = std::sqrt(
      std::max(sum2 / nn - mean * mean, 0.0) / nn);
  INFO("mean h-weight ", mean, " se ", se);
  CHECK(std::abs(mean - 1.0) < 4.0 * std::max(se, 1e-6) + 0.02);
}
