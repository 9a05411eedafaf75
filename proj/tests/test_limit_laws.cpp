#include <doctest.h>

#include <cmath>
#include <vector>

#include "stablewalk/ladder.hpp"
#include "stablewalk/limit_laws.hpp"

using namespace stablewalk;

TEST_CASE("normal cdf approximation against the erfc reference") {
  double worst = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    worst = std::max(worst, std::abs(normal_cdf(x) - normal_cdf_ref(x)));
  }
  CHECK(worst < 1e-7);
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("mid-window limit closed form") {
  const Stable st(2.0, 0.0, 0.5);
  for (const double y : {0.25, 0.5, 1.0}) {
    CHECK(limit_r3(st, 1.0, y) ==
          doctest::Approx(1.0 - (1.0 - y) * (1.0 - y)).epsilon(1e-14));
  }
  CHECK(limit_r3(st, 1.0, 0.0) == 0.0);
  CHECK(limit_r3(st, 1.0, 1.5) == 1.0);
  CHECK(limit_r3(st, 1.0, -0.5) == 0.0);

  const Stable st15(1.5, 0.0, 1.0);  // alpha rho + 1 = 1.75
  CHECK(limit_r3(st15, 2.0, 0.5) ==
        doctest::Approx(1.0 - std::pow(0.75, 1.75)).epsilon(1e-12));
}

TEST_CASE("early-window limit: Gaussian closed route") {
  const Stable st(2.0, 0.0, 0.5);
  const auto gplus = MeanderDensity::rayleigh(st.c());
  const double css = 1.0 / std::sqrt(M_PI * st.c());
  const std::vector<double> ys = {0.25, 0.5, 1.0, 2.0, 3.0};
  const std::vector<double> want = {0.1974126514, 0.3829249225, 0.6826894921,
                                    0.9544997361, 0.9973002038};
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CHECK(limit_r1(st, gplus, css, ys[i]) ==
          doctest::Approx(want[i]).epsilon(1e-6));
  }
  CHECK(limit_r1(st, gplus, css, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("late-window limit: Gaussian closed route") {
  const Stable st(2.0, 0.0, 0.5);
  const std::vector<double> ys = {-2.0, -1.0, -0.5};
  const std::vector<double> want = {0.0455002639, 0.3173105079, 0.6170750775};
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CHECK(limit_r5(st, ys[i]) == doctest::Approx(want[i]).epsilon(1e-7));
  }
  CHECK(limit_r5(st, 0.0) == 1.0);
}

TEST_CASE("short-tail-window limit: Gaussian closed route") {
  const Stable st(2.0, 0.0, 0.5);
  const std::vector<double> ys = {0.25, 0.5, 0.75, 1.0};
  const std::vector<double> want = {0.3302753626, 0.6522914458, 0.9002927410,
                                    1.0};
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CHECK(limit_r4(st, 1.0, 1.0, ys[i]) ==
          doctest::Approx(want[i]).epsilon(1e-6));
  }
  // T = 1.5 via t = 1.5, theta = 1.
  CHECK(limit_r4(st, 1.5, 1.0, 0.75) ==
        doctest::Approx(0.6070338167).epsilon(1e-6));
  CHECK(limit_r4(st, 1.5, 1.0, 1.5) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("balanced-window limit: Gaussian nested quadrature") {
  const Stable st(2.0, 0.0, 0.5);
  const auto gplus = MeanderDensity::rayleigh(st.c());
  const double css = 1.0 / std::sqrt(M_PI * st.c());
  const std::vector<double> ys = {0.25, 0.5, 0.75, 1.0};
  const std::vector<double> want = {0.5485446164, 0.8457312306, 0.9716715808,
                                    1.0};
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CHECK(limit_r2(st, gplus, css, 1.0, 1.0, ys[i]) ==
          doctest::Approx(want[i]).epsilon(2e-5));
  }
  // T = 2 via t = 2, theta = 1.
  CHECK(limit_r2(st, gplus, css, 2.0, 1.0, 1.0) ==
        doctest::Approx(0.9206723730).epsilon(2e-5));
  CHECK(limit_r2(st, gplus, css, 2.0, 1.0, 2.0) ==
        doctest::Approx(1.0).epsilon(2e-5));
}

TEST_CASE("joint minimum/endpoint probability: reflection identities") {
  const Stable st(2.0, 0.0, 0.5);
  const double sigma = std::sqrt(2.0 * st.c());
  // Independent evaluation of P(-z <= min <= y-z, B1 <= t-z) by the
  // reflection principle: F(a, c) = P(min <= a, B1 <= c).
  const auto F = [&](double a, double c) {
    if (a >= 0.0) return normal_cdf_ref(c / sigma);
    if (c <= a) return normal_cdf_ref(c / sigma);
    return 2.0 * normal_cdf_ref(a / sigma) - normal_cdf_ref((2.0 * a - c) / sigma);
  };
  for (const double z : {0.2, 1.0, 2.5}) {
    for (const double y : {0.5, 1.5}) {
      for (const double t : {1.0, 2.0}) {
        const double want = F(y - z, t - z) - F(-z, t - z);
        CHECK(joint_min_endpoint_prob(st, z, y, t, 0, 0, 1) ==
              doctest::Approx(std::max(want, 0.0)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("Monte Carlo routes are internally consistent (alpha = 1.5)") {
  const Stable st(1.5, 0.0, 1.0);
  const double v1 = limit_r5(st, -1.0, 512, 20000, 9);
  const double v2 = limit_r5(st, -1.0, 1024, 20000, 10);
  CHECK(v1 > 0.0);
  CHECK(v1 < 1.0);
  CHECK(std::abs(v1 - v2) < 0.03);
  CHECK(limit_r5(st, -0.25, 512, 20000, 9) > v1);  // monotone in y

  const double a1 = limit_r4(st, 1.0, 1.0, 0.5, 512, 20000, 11);
  const double a2 = limit_r4(st, 1.0, 1.0, 0.9, 512, 20000, 11);
  CHECK(a1 > 0.0);
  CHECK(a2 > a1);
  CHECK(a2 <= 1.0);
}

TEST_CASE("area identity: Gaussian closed route is tight") {
  const Stable st(2.0, 0.0, 0.5);
  for (const double t : {1.0, 2.0}) {
    const auto res = area_identity_residual(st, t);
    INFO("t = ", t, " residual ", res.value, " err ", res.error);
    CHECK(res.value <= 1e-3);
  }
}

TEST_CASE("area identity: Monte Carlo route within its error budget") {
  const Stable st(1.5, 0.0, 1.0);
  const auto res = area_identity_residual(st, 1.0, 512, 20000, 12);
  INFO("residual ", res.value, " err ", res.error);
  CHECK(res.value <= 4.0 * std::max(res.error, 1e-12));
}

TEST_CASE("meander density sources agree for the Gaussian walk") {
  const Stable st(2.0, 0.0, 0.5);
  const auto est =
      estimate_meander_density(st, Direction::ascending, 512, 3000, 77);
  const auto closed = MeanderDensity::rayleigh(st.c());
  const auto hist = MeanderDensity::histogram(est);
  CHECK(closed.is_closed_form());
  CHECK_FALSE(hist.is_closed_form());
  const auto f = [](double z) { return z * z; };
  const auto a = closed.integrate(f);
  const auto b = hist.integrate(f);
  INFO("closed ", a.value, " hist ", b.value, " err ", b.error);
  CHECK(std::abs(a.value - b.value) < 0.12 + 4.0 * b.error);
  // Rayleigh second moment with sigma^2 = 2c = 1 is 2.
  CHECK(a.value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("limit ensembles are deterministic in the seed") {
  const Stable st(1.5, 0.0, 1.0);
  const auto e1 = simulate_levy_ensemble(st, 256, 500, 21);
  const auto e2 = simulate_levy_ensemble(st, 256, 500, 21);
  CHECK(e1.min_scaled == e2.min_scaled);
  CHECK(e1.end_scaled == e2.end_scaled);
  for (std::size_t i = 0; i < e1.min_scaled.size(); ++i) {
    CHECK(e1.min_scaled[i] <= 0.0);
    CHECK(e1.min_scaled[i] <= e1.end_scaled[i]);
  }
}
