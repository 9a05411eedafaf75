#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stablewalk/rng.hpp"

using namespace stablewalk;

TEST_CASE("splitmix64 matches the reference stream") {
  // First three outputs from state 0 (Vigna's reference implementation).
  std::uint64_t s = 0;
  CHECK(splitmix64_next(s) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64_next(s) == 0x6E789E6AA1B965F4ULL);
  CHECK(splitmix64_next(s) == 0x06C45D188009454FULL);
}

TEST_CASE("derive_seed separates streams deterministically") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
  // No obvious collisions among a batch of small stream ids.
  std::vector<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.push_back(derive_seed(7, i));
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("xoshiro256++ streams are deterministic in the seed") {
  Rng a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next(), vb = b.next(), vc = c.next();
    all_equal = all_equal && va == vb;
    any_diff = any_diff || va != vc;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform doubles live in their half-open ranges") {
  Rng r(7);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
    const double v = r.uniform_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  // Mean of n uniforms: sd = 1/sqrt(12 n) ~ 6.5e-4; allow 5 sigma.
  CHECK(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
}

TEST_CASE("ziggurat normal has the right moments and tails") {
  Rng r(2024);
  const int n = 400000;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
  int beyond3 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sum2 += z * z;
    sum3 += z * z * z;
    if (std::abs(z) > 3.0) ++beyond3;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sum3 / n) < 5.0 * std::sqrt(15.0 / n));
  // P(|Z| > 3) = 2.6998e-3.
  const double p = static_cast<double>(beyond3) / n;
  const double se = std::sqrt(2.6998e-3 * (1 - 2.6998e-3) / n);
  CHECK(std::abs(p - 2.6998e-3) < 5.0 * se);
}

TEST_CASE("exponential draws have unit mean and variance") {
  Rng r(99);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = r.exponential();
    CHECK(e >= 0.0);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 1.0) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sum2 / n - 2.0) < 5.0 * std::sqrt(20.0 / n));
}
