#pragma once

#include <cstdint>

#include "stablewalk/rng.hpp"

namespace stablewalk {

// Admissible parameter set: alpha in (0,2)\{1} with |beta| < 1, or alpha = 1
// with beta = 0, or alpha = 2 with beta = 0; scale c > 0 throughout. The
// characteristic function is
//   E exp(iwX) = exp{ -c|w|^alpha (1 - i beta sgn(w) tan(pi alpha / 2)) }.
struct StableParams {
  double alpha;
  double beta;
  double c;
};

// Throws OutOfSetA if (alpha, beta, c) is not admissible.
StableParams validate_params(double alpha, double beta, double c);

class Stable {
 public:
  Stable(double alpha, double beta, double c);
  explicit Stable(const StableParams& p) : Stable(p.alpha, p.beta, p.c) {}

  const StableParams& params() const { return p_; }
  double alpha() const { return p_.alpha; }
  double beta() const { return p_.beta; }
  double c() const { return p_.c; }

  // Positivity parameter rho = P(X > 0), computed by integrating the density
  // over (0, inf) (done once at construction).
  double rho() const { return rho_; }

  // Density and CDF by adaptive quadrature on the characteristic-function
  // inversion integral (exact closed forms for the Gaussian and Cauchy
  // members, where the integral has a known value).
  double density(double x) const;
  double cdf(double x) const;

  // One increment, exactly distributed (Chambers–Mallows–Stuck; ziggurat
  // normal for alpha = 2).
  double sample(Rng& rng) const;

  // Scaling sequence: a_n = n^{1/alpha} (so S_n / a_n is exactly this law),
  // b_n = 1 / (n a_n).
  double a(double n) const;
  double b(double n) const;

 private:
  double density_integral(double x) const;
  double cdf_integral(double x) const;  // F(x) - 1/2 by Gil-Pelaez inversion

  StableParams p_;
  double rho_;
  // Precomputed CMS sampling constants.
  double cms_shift_;       // arctan(beta tan(pi alpha/2)) / alpha
  double cms_scale_;       // (1 + beta^2 tan^2(pi alpha/2))^{1/(2 alpha)}
  double tan_half_pi_a_;   // tan(pi alpha / 2)
  double unit_scale_;      // c^{1/alpha} (alpha != 1), c (alpha = 1)
  double inv_alpha_;
  double cms_exponent_;    // (1 - alpha) / alpha
};

// max over alpha-sweep {n in [n_lo, n_hi], k <= n/4} of
//   (sum_{j=k}^{n-k} b_j b_{n-j}) / (b_n / a_k),
// i.e. the smallest admissible constant C in the convolution bound
//   sum_{j=k}^{n-k} b_j b_{n-j} <= C b_n / a_k.
double bsum_max_ratio(double alpha, std::int64_t n_lo = 64,
                      std::int64_t n_hi = 4096);

// (sum_{j>=k} b_j) / (alpha / a_k); the tail sum is evaluated numerically up
// to sum_to and closed with an integral bracket for the remainder.
double tauberian_ratio(double alpha, std::int64_t k = 10000,
                       std::int64_t sum_to = 1000000);

}  // namespace stablewalk
