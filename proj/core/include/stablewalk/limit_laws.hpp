#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "stablewalk/ladder.hpp"
#include "stablewalk/stable.hpp"

namespace stablewalk {

struct ValueWithError {
  double value;
  double error;
};

// Standard normal CDF via the Abramowitz–Stegun 26.2.17 rational
// approximation (|error| < 7.5e-8), and an independent erfc-based reference.
double normal_cdf(double x);
double normal_cdf_ref(double x);

// Source of integrals against the time-one meander marginal g^+/g^-: either
// the exact Rayleigh closed form (alpha = 2, increments N(0, 2c)) or an
// estimated histogram.
class MeanderDensity {
 public:
  static MeanderDensity rayleigh(double c);
  static MeanderDensity histogram(const MeanderDensityEstimate& est);

  // int f(z) g(z) dz with an error estimate (quadrature error, or the
  // histogram overflow-bin bracket; f must be monotone on the overflow tail
  // for the bracket to be valid, which holds for all uses here).
  // breakpoints: interior points where f is non-smooth; the closed-form
  // route integrates panel-wise across them (the histogram route, being a
  // finite sum, ignores them).
  ValueWithError integrate(const std::function<double(double)>& f,
                           const std::vector<double>& breakpoints = {}) const;

  bool is_closed_form() const { return closed_form_; }

 private:
  MeanderDensity() = default;
  bool closed_form_ = false;
  double sigma_ = 1.0;  // Rayleigh scale
  std::shared_ptr<const MeanderDensityEstimate> hist_;
};

// Discretized paths of the limit process Y on [0,1]: per path the scaled
// minimum m_i = min_{j<=res} S_j / a_res (<= 0) and endpoint e_i =
// S_res / a_res. Used by the Monte Carlo routes for general alpha.
struct LevyEnsemble {
  std::int64_t resolution = 0;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> min_scaled;
  std::vector<double> end_scaled;
};

LevyEnsemble simulate_levy_ensemble(const Stable& st, std::int64_t resolution,
                                    std::int64_t n_paths, std::uint64_t seed);

// Early-window minimum limit (regime r1): C** H(y),
// H(y) = int_0^inf g^+(z) (z^{alpha(1-rho)} - (z - y∧z)^{alpha(1-rho)}) dz.
double limit_r1(const Stable& st, const MeanderDensity& gplus,
                double c_star_star, double y);

// Balanced-window minimum limit (regime r2) W(T, y) at
// T = t theta^{1/alpha}: the two nested-integral
// addends against g^+, with the base (T - z + q) clamped at 0.
double limit_r2(const Stable& st, const MeanderDensity& gplus,
                double c_star_star, double t, double theta, double y);

// Mid-window minimum limit (regime r3), closed form:
// 1 - (1 - y/t)^{alpha rho + 1} on [0, t].
double limit_r3(const Stable& st, double t, double y);

// P(-z <= min_{0<=s<=1} Y_s <= y - z, Y_1 <= t - z): reflection-principle
// closed form for alpha = 2, Monte Carlo over the ensemble otherwise.
double joint_min_endpoint_prob(const Stable& st, double z, double y, double t,
                               std::int64_t resolution, std::int64_t n_paths,
                               std::uint64_t seed);

// Short-tail-window minimum limit (regime r4) A(T, y) at
// T = t theta^{1/alpha}:
// ((alpha rho + 1)/T^{1+alpha rho}) int_0^inf z^{alpha rho} P(...) dz.
double limit_r4(const Stable& st, double t, double theta, double y,
                std::int64_t resolution = 4096, std::int64_t n_paths = 100000,
                std::uint64_t seed = 20240001);

// Late-window minimum limit (regime r5) P(min_{0<=s<=1} Y_s <= y), y <= 0;
// closed form 2 Phi(y)
// for alpha = 2 under the c = 1/2 normalization (general c by scaling).
double limit_r5(const Stable& st, double y, std::int64_t resolution = 4096,
                std::int64_t n_paths = 100000, std::uint64_t seed = 20240002);

// | int_0^inf z^{alpha rho} P(-z <= min Y, Y_1 <= t - z) dz
//   - t^{1 + alpha rho}/(alpha rho + 1) |,
// with an error combining Monte Carlo sigma and a resolution-doubling
// (Richardson-style) discretization check. The strongest end-to-end
// self-test of this module.
ValueWithError area_identity_residual(const Stable& st, double t,
                                      std::int64_t resolution = 4096,
                                      std::int64_t n_paths = 100000,
                                      std::uint64_t seed = 20240003);

}  // namespace stablewalk
