#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stablewalk/errors.hpp"
#include "stablewalk/renewal_table.hpp"
#include "stablewalk/stable.hpp"

namespace stablewalk {

struct WalkPath {
  double w = 0.0;         // start value S_0
  std::uint64_t seed = 0;
  std::vector<double> s;  // S_0 .. S_n
};

// Path of length n+1 starting at w >= 0; deterministic in seed.
WalkPath simulate_path(const Stable& st, double w, std::int64_t n,
                       std::uint64_t seed);

struct WindowFunctionals {
  double l_rn;          // min over S_r..S_n
  std::int64_t tau_rn;  // first index attaining the window minimum
  double m_n;           // max over S_1..S_n
  double endpoint;      // S_n
};

// Exact scan over the stored path; throws WindowOutOfRange unless
// 0 <= r <= n <= path length - 1. Argmin ties break to the smallest index.
WindowFunctionals window_functionals(const WalkPath& path, std::int64_t r,
                                     std::int64_t n);

// B(x, n) = { S_n <= x, min_{0<=i<=n} S_i >= 0 }.
struct ConditioningEvent {
  double x;
  std::int64_t n;
};

bool event_holds(const WalkPath& path, const ConditioningEvent& ev);

enum class SamplerMethod { rejection, htransform };

// Per accepted/weighted path: endpoint, running max, the sampler weight, and
// (min, first argmin, window start value) for each requested window.
struct WindowStat {
  double l;           // min over S_r..S_n
  std::int64_t tau;   // first argmin
  double s_start;     // S_r
};

struct PathSummary {
  double endpoint;
  double m_n;
  double weight;      // weight targeting the conditioned law P(. | B)
  double weight_h = 1.0;  // weight representing the harmonic-transform law
  std::vector<WindowStat> win;
};

struct ConditionedSample {
  SamplerMethod method = SamplerMethod::rejection;
  double w = 0.0;
  ConditioningEvent ev{0.0, 0};
  std::vector<std::int64_t> window_starts;
  std::vector<PathSummary> paths;
  std::uint64_t attempts = 0;
  double acceptance_rate = 0.0;
  double acceptance_se = 0.0;
  double ess = 0.0;          // effective sample size of the weights
  bool shortfall = false;    // fewer than target accepted within max_attempts
  std::int64_t target = 0;
};

// Thrown when a sampler could not reach its target within max_attempts; the
// partial sample (shortfall flag set) is carried along so callers that prefer
// flagged partial results can recover it.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, ConditionedSample partial)
      : Error(ErrorClass::compute, "BudgetExhausted", what),
        partial_sample(std::move(partial)) {}
  ConditionedSample partial_sample;
};

struct SamplerConfig {
  std::int64_t target = 1000;
  std::uint64_t max_attempts = 0;  // 0 => unbounded
  std::uint64_t seed = 1;
  std::vector<std::int64_t> window_starts;  // r values whose scans to record
  int shards = 16;  // fixed shard count; output independent of thread count
  bool throw_on_shortfall = true;
};

// Exact draws from P_w(. | B(x, n)): propose plain walks, kill at the first
// strictly negative level, accept survivors with S_n <= x. Unit weights.
ConditionedSample sample_conditioned_rejection(const Stable& st, double w,
                                               const ConditioningEvent& ev,
                                               const SamplerConfig& cfg);

// Importance sampler driven by the renewal function: each proposal step
// resamples the increment until the walk stays nonnegative, so no proposal
// ever dies; the per-step one-step survival probabilities accumulate into the
// importance weight. Per-step harmonic ratios V^-(S_{i+1})/V^-(S_i) telescope
// to V^-(S_n)/V^-(w): combined with the survival product they represent the
// h-transformed law (stored in weight_h), while the endpoint indicator
// S_n <= x corrects back to the conditioned target (stored in weight, used
// under self-normalization). Throws DegenerateWeights if the effective sample
// size drops below 10% of target.
ConditionedSample sample_conditioned_htransform(const Stable& st, double w,
                                                const ConditioningEvent& ev,
                                                const RenewalTable& vminus,
                                                const SamplerConfig& cfg);

struct EmpiricalCdf {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> stderrs;
  double ess = 0.0;
};

enum class Functional { window_min, endpoint, shifted_min };

// Weighted right-continuous empirical CDF of the chosen functional / scale
// on the given grid. window_index selects among the sample's window_starts.
EmpiricalCdf empirical_conditional_cdf(const ConditionedSample& sample,
                                       Functional functional, int window_index,
                                       double scale,
                                       const std::vector<double>& grid);

}  // namespace stablewalk
