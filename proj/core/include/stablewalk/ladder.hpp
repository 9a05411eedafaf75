#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stablewalk/renewal_table.hpp"
#include "stablewalk/stable.hpp"

namespace stablewalk {

// First K weak ladder (epoch, height) pairs of one walk. Descending ladders
// record tau_k = inf{ n > tau_{k-1} : S_n <= S_{tau_{k-1}} }, heights
// H_k = -S_{tau_k}; ascending mirrors with >= and +S. If some epoch exceeds
// the per-epoch step cap the sample is returned truncated and flagged.
struct LadderSample {
  Direction dir = Direction::descending;
  std::uint64_t seed = 0;
  std::int64_t depth = 0;  // requested K
  bool truncated = false;
  std::vector<std::int64_t> epochs;  // strictly increasing
  std::vector<double> heights;       // nondecreasing, >= 0
};

inline constexpr std::int64_t kEpochStepCap = 1000000;

LadderSample simulate_ladder(const Stable& st, Direction dir, std::int64_t K,
                             std::uint64_t seed,
                             std::int64_t step_cap = kEpochStepCap);

// Geometric grid from a_1/8 to 4*a_{n_max}.
std::vector<double> default_renewal_grid(const Stable& st, std::int64_t n_max,
                                         int points = 96);

// V(x_i) = 1 + sum_k P(H_k <= x_i | walk alive at k), estimated with
// per-epoch alive-count weighting so that cap-truncated walks do not bias the
// tail of the series; bootstrap errors over walks; exponent fitted by
// log-log regression on the upper half of the grid. Throws
// TruncationTooSevere when the extrapolated beyond-K tail of the series
// exceeds 0.5% of V(x_M).
RenewalTable estimate_renewal(const Stable& st, Direction dir,
                              const std::vector<LadderSample>& samples,
                              const std::vector<double>& grid);

// Simulate-and-estimate with doubling K until the truncation rule passes.
RenewalTable build_renewal_table(const Stable& st, Direction dir,
                                 std::int64_t n_walks, std::int64_t k_start,
                                 std::int64_t n_max, std::uint64_t seed);

// Histogram estimate of the time-one meander marginal: law of S_n/a_n given
// the walk stayed nonnegative (ascending direction; descending conditions
// the reflected walk, estimating the dual marginal). 64 bins on [0,4] plus
// an overflow bin.
struct MeanderDensityEstimate {
  Direction dir = Direction::ascending;
  StableParams params{2.0, 0.0, 0.5};
  std::int64_t n = 0;
  std::int64_t sample_size = 0;  // survivors used
  std::uint64_t seed = 0;
  std::vector<double> edges;   // 65 edges of the 64 bins
  std::vector<double> masses;  // 64 normalized masses
  double overflow_mass = 0.0;

  // integral of z^p against the histogram (bin midpoints); the overflow bin
  // contributes a bracketed correction whose half-width is reported as error.
  double integral_zpow(double p, double* error = nullptr) const;

  void save_csv(const std::string& path) const;
};

MeanderDensityEstimate estimate_meander_density(const Stable& st,
                                                Direction dir, std::int64_t n,
                                                std::int64_t target_survivors,
                                                std::uint64_t seed);

// P(tau_1 > n) for the first weak ladder epoch in the given direction,
// estimated from n_walks independent first epochs, at each horizon in ns.
struct EpochSurvival {
  Direction dir;
  std::vector<std::int64_t> ns;
  std::vector<double> prob;
  std::vector<double> se;
};

EpochSurvival estimate_epoch_survival(const Stable& st, Direction dir,
                                      std::vector<std::int64_t> ns,
                                      std::int64_t n_walks,
                                      std::uint64_t seed);

// C* and C** by the two routes:
//   integral route:  1/C*  = int z^{alpha rho}     g^-(z) dz,
//                    1/C** = int z^{alpha(1-rho)}  g^+(z) dz;
//   product route:   C*  ~ P(tau_1^+ > n) V^+(a_n),
//                    C** ~ P(tau_1^- > n) V^-(a_n)   (largest n available).
// Throws InconsistentEstimates if the routes disagree beyond 3 combined
// sigma for either constant.
struct AsymptoticConstants {
  double c_star = 0.0, c_star_se = 0.0;
  double c_star_star = 0.0, c_star_star_se = 0.0;
  double c_star_product = 0.0, c_star_product_se = 0.0;
  double c_star_star_product = 0.0, c_star_star_product_se = 0.0;
};

AsymptoticConstants estimate_constants(const Stable& st,
                                       const RenewalTable& vminus,
                                       const RenewalTable& vplus,
                                       const MeanderDensityEstimate& gplus,
                                       const MeanderDensityEstimate& gminus,
                                       const EpochSurvival& surv_minus,
                                       const EpochSurvival& surv_plus);

// Monte Carlo estimate of E[V^-(S_n); L_n >= 0] - 1 with its standard error
// (the exact value is 0 by harmonicity of V^- for the killed walk).
struct HarmonicityResult {
  double residual;
  double se;
};

HarmonicityResult harmonicity_residual(const Stable& st,
                                       const RenewalTable& vminus,
                                       std::int64_t n, std::int64_t n_samples,
                                       std::uint64_t seed);

// sum_{j=0}^{K} P(S_j <= x, L_j >= 0) estimated from killed walks, for the
// renewal-sum consistency and truncated-tail-bound diagnostics.
struct OccupationSum {
  double total;      // sum over j <= K
  double total_se;
  std::vector<std::int64_t> tail_from;  // requested tail cut points
  std::vector<double> tail_sums;        // sum over tail_from[i] <= j <= K
};

OccupationSum estimate_occupation_sum(const Stable& st, double x,
                                      std::int64_t K,
                                      std::vector<std::int64_t> tail_from,
                                      std::int64_t n_walks,
                                      std::uint64_t seed);

}  // namespace stablewalk
