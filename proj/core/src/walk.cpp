#include "stablewalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "stablewalk/limit_laws.hpp"

namespace stablewalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_start(double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw DomainError("start value w must be finite and >= 0");
  }
}

// P(X >= -s) = 1 - F(-s), needed per proposal step by the h-transform
// sampler. Closed form for alpha = 2; for other parameters a cumulative
// trapezoid table over an asinh-spaced grid of density values (built once
// per parameter set; interpolation error ~1e-5, far below sampler noise).
class StepSurvival {
 public:
  explicit StepSurvival(const Stable& st) : alpha_(st.alpha()) {
    if (alpha_ == 2.0) {
      sigma_ = std::sqrt(2.0 * st.c());
      return;
    }
    const int n = 4097;
    const double span = std::asinh(1e7);
    xs_.resize(n);
    cdf_.resize(n);
    std::vector<double> dens(n);
    for (int i = 0; i < n; ++i) {
      const double u = span * (2.0 * i / (n - 1) - 1.0);
      xs_[i] = std::sinh(u);
      dens[i] = st.density(xs_[i]);
    }
    cdf_[0] = 0.0;
    for (int i = 1; i < n; ++i) {
      cdf_[i] = cdf_[i - 1] +
                0.5 * (dens[i] + dens[i - 1]) * (xs_[i] - xs_[i - 1]);
    }
    // Anchor the table to cdf(0) = 1 - rho (exact) and clamp the ends.
    const int mid = n / 2;  // xs_[mid] == 0
    const double shift = (1.0 - st.rho()) - cdf_[mid];
    for (auto& v : cdf_) v = std::clamp(v + shift, 0.0, 1.0);
  }

  double survival(double s) const {  // P(X >= -s)
    if (sigma_ > 0.0) return normal_cdf(s / sigma_);
    return 1.0 - interp_cdf(-s);
  }

 private:
  double interp_cdf(double x) const {
    if (x <= xs_.front()) return 0.0;
    if (x >= xs_.back()) return 1.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return cdf_[i - 1] + t * (cdf_[i] - cdf_[i - 1]);
  }

  double alpha_;
  double sigma_ = 0.0;
  std::vector<double> xs_, cdf_;
};

const StepSurvival& step_survival(const Stable& st) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double>, std::unique_ptr<StepSurvival>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(st.alpha(), st.beta(), st.c());
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<StepSurvival>(st);
  return *slot;
}

struct WindowScan {
  std::int64_t start;
  double l;
  std::int64_t tau;
  double s_start;
};

void validate_sampler_inputs(const ConditioningEvent& ev,
                             const SamplerConfig& cfg) {
  if (ev.n < 1) throw DomainError("conditioning horizon n must be >= 1");
  if (!(ev.x >= 0.0)) throw DomainError("conditioning bound x must be >= 0");
  if (cfg.target < 1) throw DomainError("target_accepts must be >= 1");
  if (cfg.shards < 1) throw DomainError("shards must be >= 1");
  for (const auto ws : cfg.window_starts) {
    if (ws < 0 || ws > ev.n) {
      throw WindowOutOfRange("window start outside [0, n]");
    }
  }
}

ConditionedSample finalize(const Stable&, SamplerMethod method, double w,
                           const ConditioningEvent& ev,
                           const SamplerConfig& cfg,
                           std::vector<std::vector<PathSummary>>& by_shard,
                           std::uint64_t attempts) {
  ConditionedSample out;
  out.method = method;
  out.w = w;
  out.ev = ev;
  out.window_starts = cfg.window_starts;
  out.target = cfg.target;
  out.attempts = attempts;
  for (auto& shard : by_shard) {
    out.paths.insert(out.paths.end(), shard.begin(), shard.end());
    shard.clear();
  }
  const double n_acc = static_cast<double>(out.paths.size());
  if (attempts > 0) {
    const double p = n_acc / static_cast<double>(attempts);
    out.acceptance_rate = p;
    out.acceptance_se =
        std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(attempts));
  }
  double sw = 0.0, sw2 = 0.0;
  for (const auto& ps : out.paths) {
    sw += ps.weight;
    sw2 += ps.weight * ps.weight;
  }
  out.ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
  out.shortfall = out.paths.size() < static_cast<std::size_t>(cfg.target);
  if (out.shortfall && cfg.throw_on_shortfall) {
    std::ostringstream os;
    os << "accepted " << out.paths.size() << " of " << cfg.target
       << " within " << attempts << " attempts (n=" << ev.n << ", x=" << ev.x
       << ")";
    throw BudgetExhausted(os.str(), std::move(out));
  }
  return out;
}

}  // namespace

WalkPath simulate_path(const Stable& st, double w, std::int64_t n,
                       std::uint64_t seed) {
  check_start(w);
  if (n < 0) throw DomainError("simulate_path: n must be >= 0");
  WalkPath path;
  path.w = w;
  path.seed = seed;
  path.s.resize(static_cast<std::size_t>(n) + 1);
  path.s[0] = w;
  Rng rng(seed);
  double s = w;
  for (std::int64_t i = 1; i <= n; ++i) {
    s += st.sample(rng);
    path.s[static_cast<std::size_t>(i)] = s;
  }
  return path;
}

WindowFunctionals window_functionals(const WalkPath& path, std::int64_t r,
                                     std::int64_t n) {
  const auto len = static_cast<std::int64_t>(path.s.size());
  if (r < 0 || r > n || n > len - 1) {
    std::ostringstream os;
    os << "window [" << r << ", " << n << "] invalid for path of length "
       << len;
    throw WindowOutOfRange(os.str());
  }
  WindowFunctionals out;
  out.l_rn = kInf;
  out.tau_rn = r;
  for (std::int64_t i = r; i <= n; ++i) {
    const double v = path.s[static_cast<std::size_t>(i)];
    if (v < out.l_rn) {
      out.l_rn = v;
      out.tau_rn = i;
    }
  }
  out.m_n = -kInf;
  for (std::int64_t i = 1; i <= n; ++i) {
    out.m_n = std::max(out.m_n, path.s[static_cast<std::size_t>(i)]);
  }
  if (n == 0) out.m_n = path.s[0];
  out.endpoint = path.s[static_cast<std::size_t>(n)];
  return out;
}

bool event_holds(const WalkPath& path, const ConditioningEvent& ev) {
  const auto len = static_cast<std::int64_t>(path.s.size());
  if (len < ev.n + 1) {
    throw WindowOutOfRange("path shorter than conditioning horizon");
  }
  for (std::int64_t i = 0; i <= ev.n; ++i) {
    if (path.s[static_cast<std::size_t>(i)] < 0.0) return false;
  }
  return path.s[static_cast<std::size_t>(ev.n)] <= ev.x;
}

ConditionedSample sample_conditioned_rejection(const Stable& st, double w,
                                               const ConditioningEvent& ev,
                                               const SamplerConfig& cfg) {
  check_start(w);
  validate_sampler_inputs(ev, cfg);
  const int shards = cfg.shards;
  std::vector<std::vector<PathSummary>> by_shard(
      static_cast<std::size_t>(shards));
  std::vector<std::uint64_t> attempts_by_shard(
      static_cast<std::size_t>(shards), 0);

  const std::int64_t n = ev.n;
  const std::size_t n_win = cfg.window_starts.size();

#pragma omp parallel for schedule(dynamic, 1)
  for (int shard = 0; shard < shards; ++shard) {
    const std::int64_t quota =
        cfg.target / shards + (shard < cfg.target % shards ? 1 : 0);
    std::uint64_t attempt_cap = 0;
    if (cfg.max_attempts > 0) {
      attempt_cap = cfg.max_attempts / static_cast<std::uint64_t>(shards) +
                    (static_cast<std::uint64_t>(shard) <
                             cfg.max_attempts % static_cast<std::uint64_t>(shards)
                         ? 1
                         : 0);
    }
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(shard)));
    auto& sink = by_shard[static_cast<std::size_t>(shard)];
    std::vector<WindowScan> scans(n_win);
    std::uint64_t attempts = 0;
    std::int64_t accepted = 0;
    while (accepted < quota && (attempt_cap == 0 || attempts < attempt_cap)) {
      ++attempts;
      double s = w;
      double m_n = -kInf;
      for (std::size_t j = 0; j < n_win; ++j) {
        scans[j] = {cfg.window_starts[j], kInf, -1, 0.0};
        if (scans[j].start == 0) scans[j] = {0, w, 0, w};
      }
      bool dead = false;
      for (std::int64_t i = 1; i <= n; ++i) {
        s += st.sample(rng);
        if (s < 0.0) {
          dead = true;
          break;
        }
        if (s > m_n) m_n = s;
        for (std::size_t j = 0; j < n_win; ++j) {
          auto& sc = scans[j];
          if (i == sc.start) {
            sc.l = s;
            sc.tau = i;
            sc.s_start = s;
          } else if (i > sc.start && s < sc.l) {
            sc.l = s;
            sc.tau = i;
          }
        }
      }
      if (dead || s > ev.x) continue;
      PathSummary ps;
      ps.endpoint = s;
      ps.m_n = m_n;
      ps.weight = 1.0;
      ps.win.resize(n_win);
      for (std::size_t j = 0; j < n_win; ++j) {
        ps.win[j] = {scans[j].l, scans[j].tau, scans[j].s_start};
      }
      sink.push_back(std::move(ps));
      ++accepted;
    }
    attempts_by_shard[static_cast<std::size_t>(shard)] = attempts;
  }

  std::uint64_t attempts = 0;
  for (const auto a : attempts_by_shard) attempts += a;
  return finalize(st, SamplerMethod::rejection, w, ev, cfg, by_shard, attempts);
}

ConditionedSample sample_conditioned_htransform(const Stable& st, double w,
                                                const ConditioningEvent& ev,
                                                const RenewalTable& vminus,
                                                const SamplerConfig& cfg) {
  check_start(w);
  validate_sampler_inputs(ev, cfg);
  if (vminus.dir != Direction::descending) {
    throw DomainError("h-transform sampler needs the descending renewal table");
  }
  const auto& surv = step_survival(st);
  const int shards = cfg.shards;
  std::vector<std::vector<PathSummary>> by_shard(
      static_cast<std::size_t>(shards));
  std::vector<std::uint64_t> attempts_by_shard(
      static_cast<std::size_t>(shards), 0);

  const std::int64_t n = ev.n;
  const std::size_t n_win = cfg.window_starts.size();
  const double v_w = vminus.eval(w);

#pragma omp parallel for schedule(dynamic, 1)
  for (int shard = 0; shard < shards; ++shard) {
    const std::int64_t quota =
        cfg.target / shards + (shard < cfg.target % shards ? 1 : 0);
    std::uint64_t attempt_cap = 0;
    if (cfg.max_attempts > 0) {
      attempt_cap = cfg.max_attempts / static_cast<std::uint64_t>(shards) +
                    (static_cast<std::uint64_t>(shard) <
                             cfg.max_attempts % static_cast<std::uint64_t>(shards)
                         ? 1
                         : 0);
    }
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(shard)));
    auto& sink = by_shard[static_cast<std::size_t>(shard)];
    std::vector<WindowScan> scans(n_win);
    std::uint64_t attempts = 0;
    std::int64_t accepted = 0;
    while (accepted < quota && (attempt_cap == 0 || attempts < attempt_cap)) {
      ++attempts;
      double s = w;
      double m_n = -kInf;
      double log_zprod = 0.0;  // log prod_i P(S_i + X >= 0)
      for (std::size_t j = 0; j < n_win; ++j) {
        scans[j] = {cfg.window_starts[j], kInf, -1, 0.0};
        if (scans[j].start == 0) scans[j] = {0, w, 0, w};
      }
      for (std::int64_t i = 1; i <= n; ++i) {
        // Proposal step restricted to nonnegativity: resample the increment
        // until the walk stays >= 0 (that is, draw from the plain kernel
        // conditioned on survival), and absorb the one-step survival
        // probability into the importance weight.
        const double z = surv.survival(s);
        log_zprod += std::log(z);
        double next;
        do {
          next = s + st.sample(rng);
        } while (next < 0.0);
        s = next;
        if (s > m_n) m_n = s;
        for (std::size_t j = 0; j < n_win; ++j) {
          auto& sc = scans[j];
          if (i == sc.start) {
            sc.l = s;
            sc.tau = i;
            sc.s_start = s;
          } else if (i > sc.start && s < sc.l) {
            sc.l = s;
            sc.tau = i;
          }
        }
      }
      if (s > ev.x) continue;
      // Per-step harmonic ratios V^-(S_{i+1})/V^-(S_i) telescope to
      // V^-(S_n)/V^-(w); together with the survival product this represents
      // the h-transformed law. Correcting back to the conditioned target
      // divides the telescoped factor out again, leaving the survival
      // product times the endpoint indicator as the sampling weight.
      PathSummary ps;
      ps.endpoint = s;
      ps.m_n = m_n;
      ps.weight = std::exp(log_zprod);
      ps.weight_h = ps.weight * vminus.eval(s) / v_w;
      ps.win.resize(n_win);
      for (std::size_t j = 0; j < n_win; ++j) {
        ps.win[j] = {scans[j].l, scans[j].tau, scans[j].s_start};
      }
      sink.push_back(std::move(ps));
      ++accepted;
    }
    attempts_by_shard[static_cast<std::size_t>(shard)] = attempts;
  }

  std::uint64_t attempts = 0;
  for (const auto a : attempts_by_shard) attempts += a;
  auto out = finalize(st, SamplerMethod::htransform, w, ev, cfg, by_shard,
                      attempts);
  if (out.ess < 0.1 * static_cast<double>(cfg.target) && !out.shortfall) {
    std::ostringstream os;
    os << "effective sample size " << out.ess << " below 10% of target "
       << cfg.target;
    throw DegenerateWeights(os.str());
  }
  return out;
}

EmpiricalCdf empirical_conditional_cdf(const ConditionedSample& sample,
                                       Functional functional, int window_index,
                                       double scale,
                                       const std::vector<double>& grid) {
  if (sample.paths.empty()) throw EmptySample("no accepted paths");
  if (!(scale > 0.0)) throw DomainError("scale must be positive");
  if (functional != Functional::endpoint) {
    if (window_index < 0 ||
        static_cast<std::size_t>(window_index) >=
            sample.window_starts.size()) {
      throw DomainError("window_index outside recorded windows");
    }
  }
  if (grid.empty()) throw GridMismatch("grid must be non-empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw GridMismatch("grid must be strictly increasing");
    }
  }
  std::vector<double> vals;
  std::vector<double> wts;
  vals.reserve(sample.paths.size());
  wts.reserve(sample.paths.size());
  double sw = 0.0, sw2 = 0.0;
  for (const auto& ps : sample.paths) {
    double v = 0.0;
    switch (functional) {
      case Functional::window_min:
        v = ps.win[static_cast<std::size_t>(window_index)].l;
        break;
      case Functional::endpoint:
        v = ps.endpoint;
        break;
      case Functional::shifted_min:
        v = ps.win[static_cast<std::size_t>(window_index)].l -
            ps.win[static_cast<std::size_t>(window_index)].s_start;
        break;
    }
    vals.push_back(v / scale);
    wts.push_back(ps.weight);
    sw += ps.weight;
    sw2 += ps.weight * ps.weight;
  }
  if (!(sw > 0.0)) throw EmptySample("all weights are zero");
  EmpiricalCdf out;
  out.grid = grid;
  out.ess = sw * sw / sw2;
  out.values.resize(grid.size());
  out.stderrs.resize(grid.size());
  // Sort once; sweep the grid over the sorted values.
  std::vector<std::size_t> order(vals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&vals](std::size_t a, std::size_t b) {
    return vals[a] < vals[b];
  });
  std::size_t pos = 0;
  double acc = 0.0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    while (pos < order.size() && vals[order[pos]] <= grid[gi]) {
      acc += wts[order[pos]];
      ++pos;
    }
    const double f = acc / sw;
    out.values[gi] = f;
    out.stderrs[gi] = std::sqrt(std::max(f * (1.0 - f), 0.0) / out.ess);
  }
  return out;
}

}  // namespace stablewalk
