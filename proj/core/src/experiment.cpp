#include "stablewalk/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stablewalk/rng.hpp"

namespace stablewalk {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::r1: return "r1";
    case Regime::r2: return "r2";
    case Regime::r3: return "r3";
    case Regime::r4: return "r4";
    case Regime::r5: return "r5";
  }
  return "r3";
}

Regime regime_from_string(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (l == "r1") return Regime::r1;
  if (l == "r2") return Regime::r2;
  if (l == "r3") return Regime::r3;
  if (l == "r4") return Regime::r4;
  if (l == "r5") return Regime::r5;
  throw DomainError("unknown regime '" + s + "' (expected r1..r5)");
}

Triple default_triple(Regime regime, std::int64_t n, double theta) {
  if (n < 2) throw DomainError("need n >= 2");
  const double nd = static_cast<double>(n);
  const auto ceil_pow = [nd](double e) {
    return static_cast<std::int64_t>(std::ceil(std::pow(nd, e)));
  };
  Triple t{n, 1, 0};
  switch (regime) {
    case Regime::r1:
      t.r = 4 * ceil_pow(0.125);
      t.k = ceil_pow(0.5);
      break;
    case Regime::r2:
      t.r = ceil_pow(0.5);
      t.k = static_cast<std::int64_t>(
          std::ceil(theta * static_cast<double>(t.r)));
      break;
    case Regime::r3:
      t.k = ceil_pow(0.25);
      t.r = n / 2;
      break;
    case Regime::r4: {
      t.k = ceil_pow(0.5);
      const auto m = static_cast<std::int64_t>(
          std::ceil(static_cast<double>(t.k) / theta));
      t.r = n - m;
      break;
    }
    case Regime::r5:
      t.r = n - 4 * ceil_pow(0.125);
      t.k = ceil_pow(0.5);
      break;
  }
  return t;
}

void validate_plan(const ExperimentPlan& plan) {
  validate_params(plan.alpha, plan.beta, plan.c);
  if (!(plan.t > 0.0)) throw DomainError("t must be > 0");
  if (!(plan.theta > 0.0)) throw DomainError("theta must be > 0");
  if (!(plan.w >= 0.0)) throw DomainError("w must be >= 0");
  if (plan.budget_per_triple < 0) throw DomainError("negative budget");
  if (plan.ladder.empty()) throw DomainError("empty ladder");
  if (!plan.budget_ladder.empty() &&
      plan.budget_ladder.size() != plan.ladder.size()) {
    throw DomainError("budget_ladder must match the ladder length");
  }
  for (std::size_t i = 1; i < plan.y_grid.size(); ++i) {
    if (!(plan.y_grid[i] > plan.y_grid[i - 1])) {
      throw GridMismatch("y grid must be strictly increasing");
    }
  }
  for (const auto& tr : plan.ladder) {
    std::ostringstream os;
    os << "(n=" << tr.n << ", k=" << tr.k << ", r=" << tr.r << ")";
    const std::string id = os.str();
    if (tr.n < 2 || tr.k < 1 || tr.r < 0 || tr.r > tr.n) {
      throw RegimeViolation("triple needs n >= 2, k >= 1, 0 <= r <= n, got " +
                            id);
    }
    switch (plan.regime) {
      case Regime::r1:
        if (tr.r < 1 || 2 * tr.r > tr.k || 2 * tr.k > tr.n) {
          throw RegimeViolation("R1 needs 1 <= r <= k/2 and k <= n/2, got " +
                                id);
        }
        break;
      case Regime::r2: {
        const double ratio =
            static_cast<double>(tr.k) /
            (plan.theta * static_cast<double>(std::max<std::int64_t>(tr.r, 1)));
        if (tr.r < 1 || 2 * tr.k > tr.n || 2 * tr.r > tr.n || ratio < 0.5 ||
            ratio > 2.0) {
          throw RegimeViolation(
              "R2 needs r >= 1, k,r <= n/2 and k within [0.5, 2] of theta*r, "
              "got " + id);
        }
        break;
      }
      case Regime::r3:
        if (tr.r < 1 || tr.r >= tr.n ||
            8 * tr.k > std::min(tr.r, tr.n - tr.r)) {
          throw RegimeViolation(
              "R3 needs 1 <= r < n and k <= min(r, n-r)/8, got " + id);
        }
        break;
      case Regime::r4: {
        const auto m = tr.m();
        const double ratio = static_cast<double>(m) * plan.theta /
                             static_cast<double>(tr.k);
        if (m < 1 || 2 * tr.k > tr.n || ratio < 0.5 || ratio > 2.0) {
          throw RegimeViolation(
              "R4 needs m = n-r >= 1, k <= n/2, m within [0.5, 2] of k/theta, "
              "got " + id);
        }
        break;
      }
      case Regime::r5: {
        const auto m = tr.m();
        if (m < 1 || 2 * m > tr.k || 2 * tr.k > tr.n) {
          throw RegimeViolation("R5 needs 1 <= m = n-r <= k/2 and k <= n/2, "
                                "got " + id);
        }
        break;
      }
    }
  }
}

double ks_distance(const std::vector<double>& emp_grid,
                   const std::vector<double>& emp_values,
                   const std::vector<double>& theory_grid,
                   const std::vector<double>& theory_values) {
  if (emp_grid.size() != emp_values.size() ||
      theory_grid.size() != theory_values.size() || emp_grid.empty() ||
      theory_grid.size() < 2) {
    throw GridMismatch("KS inputs need matching, nonempty grids");
  }
  double ks = 0.0;
  for (std::size_t i = 0; i < emp_grid.size(); ++i) {
    const double y = emp_grid[i];
    if (y < theory_grid.front() - 1e-12 || y > theory_grid.back() + 1e-12) {
      throw GridMismatch("theory grid does not cover the empirical grid");
    }
    const auto it =
        std::lower_bound(theory_grid.begin(), theory_grid.end(), y);
    double tv;
    if (it == theory_grid.begin()) {
      tv = theory_values.front();
    } else if (it == theory_grid.end()) {
      tv = theory_values.back();
    } else {
      const auto j = static_cast<std::size_t>(it - theory_grid.begin());
      const double t = (y - theory_grid[j - 1]) /
                       (theory_grid[j] - theory_grid[j - 1]);
      tv = theory_values[j - 1] + t * (theory_values[j] - theory_values[j - 1]);
    }
    ks = std::max(ks, std::abs(emp_values[i] - tv));
  }
  return ks;
}

double localization_fraction(const ConditionedSample& sample, int window_index,
                             std::int64_t tail_start) {
  if (sample.paths.empty()) throw EmptySample("no paths");
  if (window_index < 0 || static_cast<std::size_t>(window_index) >=
                              sample.window_starts.size()) {
    throw DomainError("window_index outside recorded windows");
  }
  double num = 0.0, den = 0.0;
  for (const auto& ps : sample.paths) {
    den += ps.weight;
    if (ps.win[static_cast<std::size_t>(window_index)].tau >= tail_start) {
      num += ps.weight;
    }
  }
  if (!(den > 0.0)) throw EmptySample("all weights are zero");
  return num / den;
}

// ---------------------------------------------------------------------------
// Artifact cache
// ---------------------------------------------------------------------------

CacheBudgets CacheBudgets::full() { return CacheBudgets{}; }

CacheBudgets CacheBudgets::smoke() {
  CacheBudgets b;
  b.renewal_walks_a2 = 2000;
  b.renewal_walks_a15 = 1000;
  b.renewal_k_start = 64;
  b.renewal_n_max = 512;
  b.meander_n = 256;
  b.meander_survivors = 2000;
  b.survival_walks = 200000;
  b.ensemble_resolution = 512;
  b.ensemble_paths = 20000;
  return b;
}

ArtifactCache::ArtifactCache(std::uint64_t base_seed, CacheBudgets budgets)
    : base_seed_(base_seed), budgets_(budgets) {}

std::string ArtifactCache::key(const Stable& st, Direction dir,
                               const char* what) const {
  std::ostringstream os;
  os << what << ":" << to_string(dir) << ":a=" << fmt_double(st.alpha())
     << ":b=" << fmt_double(st.beta()) << ":c=" << fmt_double(st.c());
  return os.str();
}

std::uint64_t ArtifactCache::artifact_seed(const std::string& key) const {
  return derive_seed(base_seed_, fnv1a(key));
}

const RenewalTable& ArtifactCache::renewal(const Stable& st, Direction dir) {
  const auto k = key(st, dir, "renewal");
  auto it = renewal_.find(k);
  if (it != renewal_.end()) return it->second;
  const bool gaussian = st.alpha() == 2.0;
  const std::int64_t walks =
      gaussian ? budgets_.renewal_walks_a2 : budgets_.renewal_walks_a15;
  // Skewed heavy-tailed cases mix one fast and one slow ladder direction;
  // shortening the tabulated range keeps their build time in line with the
  // symmetric cases without touching the estimator.
  std::int64_t n_max = budgets_.renewal_n_max;
  if (!gaussian && st.beta() != 0.0) n_max = std::max<std::int64_t>(n_max / 4, 64);
  RenewalTable table = build_renewal_table(st, dir, walks,
                                           budgets_.renewal_k_start, n_max,
                                           artifact_seed(k));
  return renewal_.emplace(k, std::move(table)).first->second;
}

const MeanderDensityEstimate& ArtifactCache::meander(const Stable& st,
                                                     Direction dir) {
  const auto k = key(st, dir, "meander");
  auto it = meander_.find(k);
  if (it != meander_.end()) return it->second;
  auto est = estimate_meander_density(st, dir, budgets_.meander_n,
                                      budgets_.meander_survivors,
                                      artifact_seed(k));
  return meander_.emplace(k, std::move(est)).first->second;
}

const EpochSurvival& ArtifactCache::survival(const Stable& st, Direction dir) {
  const auto k = key(st, dir, "survival");
  auto it = survival_.find(k);
  if (it != survival_.end()) return it->second;
  std::vector<std::int64_t> ns = {256, 1024, 4096, 16384};
  auto est = estimate_epoch_survival(st, dir, ns, budgets_.survival_walks,
                                     artifact_seed(k));
  return survival_.emplace(k, std::move(est)).first->second;
}

const LevyEnsemble& ArtifactCache::ensemble(const Stable& st) {
  const auto k = key(st, Direction::ascending, "ensemble");
  auto it = ensemble_.find(k);
  if (it != ensemble_.end()) return it->second;
  auto ens = simulate_levy_ensemble(st, budgets_.ensemble_resolution,
                                    budgets_.ensemble_paths, artifact_seed(k));
  return ensemble_.emplace(k, std::move(ens)).first->second;
}

MeanderDensity ArtifactCache::meander_source(const Stable& st, Direction dir) {
  if (st.alpha() == 2.0) return MeanderDensity::rayleigh(st.c());
  return MeanderDensity::histogram(meander(st, dir));
}

double ArtifactCache::constant_integral_route(const Stable& st,
                                              Direction dir) {
  const double alpha = st.alpha();
  const double rho = st.rho();
  if (alpha == 2.0) {
    // E[Z] of a Rayleigh with sigma^2 = 2c is sqrt(pi c); both constants
    // coincide by symmetry.
    return 1.0 / std::sqrt(M_PI * st.c());
  }
  if (dir == Direction::descending) {
    return 1.0 / meander(st, Direction::ascending)
                     .integral_zpow(alpha * (1.0 - rho));
  }
  return 1.0 /
         meander(st, Direction::descending).integral_zpow(alpha * rho);
}

// ---------------------------------------------------------------------------
// run_experiment
// ---------------------------------------------------------------------------

namespace {

// Process-wide memo of conditioned samples keyed by the full sampling
// configuration. Plans that condition on the same event with the same seed
// and windows (e.g. the leading- and trailing-window regimes of a shared
// ladder) reuse one ensemble instead of re-simulating it.
std::mutex g_sample_mu;
std::map<std::string, ConditionedSample>& sample_memo() {
  static std::map<std::string, ConditionedSample> memo;
  return memo;
}

std::string sample_key(const Stable& st, double w, const ConditioningEvent& ev,
                       const SamplerConfig& cfg, SamplerMethod method) {
  std::ostringstream os;
  os << fmt_double(st.alpha()) << "|" << fmt_double(st.beta()) << "|"
     << fmt_double(st.c()) << "|w=" << fmt_double(w)
     << "|x=" << fmt_double(ev.x) << "|n=" << ev.n << "|t=" << cfg.target
     << "|a=" << cfg.max_attempts << "|s=" << cfg.seed
     << "|m=" << static_cast<int>(method) << "|win=";
  for (const auto ws : cfg.window_starts) os << ws << ",";
  return os.str();
}

std::vector<double> default_y_grid(const ExperimentPlan& plan) {
  double lo = 0.0, hi = 1.0;
  const double T = plan.t * std::pow(plan.theta, 1.0 / plan.alpha);
  switch (plan.regime) {
    case Regime::r1: lo = 0.0; hi = 4.0; break;
    case Regime::r2: lo = 0.0; hi = T; break;
    case Regime::r3: lo = 0.0; hi = plan.t; break;
    case Regime::r4: lo = 0.0; hi = T; break;
    case Regime::r5: lo = -4.0; hi = 0.0; break;
  }
  const int points = 41;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  }
  return grid;
}

struct TheoryCurve {
  std::function<double(double, const Triple&)> f;
};

TheoryCurve resolve_theory(const ExperimentPlan& plan, const Stable& st,
                           ArtifactCache* cache) {
  if (plan.theory_override) return {plan.theory_override};
  const Regime regime = plan.regime;
  const double t = plan.t, theta = plan.theta;
  if (regime == Regime::r3) {
    return {[&st, t](double y, const Triple&) { return limit_r3(st, t, y); }};
  }
  if (regime == Regime::r5) {
    return {[&st](double y, const Triple&) { return limit_r5(st, y); }};
  }
  if (regime == Regime::r4) {
    return {[&st, t, theta](double y, const Triple&) {
      return limit_r4(st, t, theta, y);
    }};
  }
  // R1/R2 need the meander marginal and the C** constant.
  if (st.alpha() != 2.0 && cache == nullptr) {
    throw DomainError(
        "R1/R2 theory for alpha != 2 needs an artifact cache for the "
        "estimated meander marginal");
  }
  auto gplus = std::make_shared<MeanderDensity>(
      st.alpha() == 2.0 ? MeanderDensity::rayleigh(st.c())
                        : cache->meander_source(st, Direction::ascending));
  const double css = st.alpha() == 2.0
                         ? 1.0 / std::sqrt(M_PI * st.c())
                         : cache->constant_integral_route(
                               st, Direction::descending);
  if (regime == Regime::r1) {
    return {[&st, gplus, css](double y, const Triple&) {
      return limit_r1(st, *gplus, css, y);
    }};
  }
  // The R2 curve does not depend on the rung, and each point is a nested
  // quadrature; memoize per y so the ladder reuses one evaluation.
  auto memo = std::make_shared<std::map<double, double>>();
  return {[&st, gplus, css, t, theta, memo](double y, const Triple&) {
    const auto it = memo->find(y);
    if (it != memo->end()) return it->second;
    const double v = limit_r2(st, *gplus, css, t, theta, y);
    memo->emplace(y, v);
    return v;
  }};
}

}  // namespace

ComparisonReport run_experiment(const ExperimentPlan& plan,
                                ArtifactCache* cache) {
  validate_plan(plan);
  const Stable st(plan.alpha, plan.beta, plan.c);
  const auto y_grid =
      plan.y_grid.empty() ? default_y_grid(plan) : plan.y_grid;
  const auto theory = resolve_theory(plan, st, cache);

  ComparisonReport report;
  report.regime = plan.regime;
  report.alpha = plan.alpha;
  report.beta = plan.beta;
  report.c = plan.c;
  report.t = plan.t;
  report.theta = plan.theta;
  report.w = plan.w;
  report.sampler = plan.sampler;
  report.seed = plan.seed;
  report.threads = max_threads();
  report.label = plan.label;

  for (std::size_t rung = 0; rung < plan.ladder.size(); ++rung) {
    const Triple& tr = plan.ladder[rung];
    const std::int64_t budget = plan.budget_ladder.empty()
                                    ? plan.budget_per_triple
                                    : plan.budget_ladder[rung];
    TripleResult res;
    res.triple = tr;

    // Functional layout per regime: the scan window always starts at r; the
    // dual window n - r is recorded so that leading- and trailing-window
    // plans sharing one conditioning event reuse the same draw.
    std::vector<std::int64_t> windows = {tr.r, tr.n - tr.r};
    std::sort(windows.begin(), windows.end());
    windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
    const int win_idx = static_cast<int>(
        std::find(windows.begin(), windows.end(), tr.r) - windows.begin());

    double scale = 1.0;
    Functional functional = Functional::window_min;
    switch (plan.regime) {
      case Regime::r1:
      case Regime::r2:
        scale = st.a(tr.r);
        break;
      case Regime::r3:
        scale = st.a(tr.k);
        break;
      case Regime::r4:
        scale = st.a(tr.m());
        break;
      case Regime::r5:
        scale = st.a(tr.m());
        functional = Functional::shifted_min;
        break;
    }

    if (budget <= 0) {
      std::ostringstream os;
      os << "SamplerShortfall(n=" << tr.n << ", accepted=0/" << budget << ")";
      report.flags.push_back(os.str());
      res.shortfall = true;
      res.ks = std::numeric_limits<double>::quiet_NaN();
      report.triples.push_back(std::move(res));
      continue;
    }

    SamplerConfig cfg;
    cfg.target = budget;
    cfg.max_attempts = plan.max_attempts_per_triple;
    cfg.seed = derive_seed(plan.seed, static_cast<std::uint64_t>(rung));
    cfg.window_starts = windows;
    cfg.throw_on_shortfall = false;
    const ConditioningEvent ev{plan.t * st.a(tr.k), tr.n};

    ConditionedSample sample;
    const auto memo_key = sample_key(st, plan.w, ev, cfg, plan.sampler);
    bool have = false;
    {
      std::lock_guard<std::mutex> lock(g_sample_mu);
      const auto it = sample_memo().find(memo_key);
      if (it != sample_memo().end()) {
        sample = it->second;
        have = true;
      }
    }
    if (!have) {
      if (plan.sampler == SamplerMethod::rejection) {
        sample = sample_conditioned_rejection(st, plan.w, ev, cfg);
      } else {
        if (cache == nullptr) {
          throw DomainError(
              "the renewal-weighted sampler needs an artifact cache for V^-");
        }
        const auto& vminus = cache->renewal(st, Direction::descending);
        sample = sample_conditioned_htransform(st, plan.w, ev, vminus, cfg);
      }
      std::lock_guard<std::mutex> lock(g_sample_mu);
      sample_memo().emplace(memo_key, sample);
    }

    res.attempts = sample.attempts;
    res.acceptance_rate = sample.acceptance_rate;
    res.ess = sample.ess;
    res.shortfall = sample.shortfall;
    if (sample.shortfall) {
      std::ostringstream os;
      os << "SamplerShortfall(n=" << tr.n << ", accepted="
         << sample.paths.size() << "/" << budget << ")";
      report.flags.push_back(os.str());
    }
    if (sample.paths.empty()) {
      res.ks = std::numeric_limits<double>::quiet_NaN();
      report.triples.push_back(std::move(res));
      continue;
    }

    const auto emp =
        empirical_conditional_cdf(sample, functional, win_idx, scale, y_grid);
    res.y = y_grid;
    res.emp = emp.values;
    res.emp_err = emp.stderrs;
    res.theory.resize(y_grid.size());
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
      res.theory[i] = theory.f(y_grid[i], tr);
    }
    res.ks = ks_distance(y_grid, res.emp, y_grid, res.theory);
    res.ks_err = 0.6 / std::sqrt(std::max(emp.ess, 1.0));

    if (plan.regime == Regime::r3) {
      res.localization =
          localization_fraction(sample, win_idx, tr.n - tr.r);
      const std::int64_t short_tail = std::max(tr.r, tr.n - 8 * tr.k);
      res.localization_tail =
          localization_fraction(sample, win_idx, short_tail);
    }
    report.triples.push_back(std::move(res));
  }
  return report;
}

SweepResult convergence_sweep(const ExperimentPlan& plan,
                              ArtifactCache* cache) {
  if (plan.ladder.size() < 3) {
    throw DomainError("convergence sweep needs a ladder of at least 3 rungs");
  }
  for (std::size_t i = 1; i < plan.ladder.size(); ++i) {
    if (plan.ladder[i].n <= plan.ladder[i - 1].n) {
      throw DomainError("sweep ladder must have strictly increasing n");
    }
  }
  SweepResult out;
  out.report = run_experiment(plan, cache);
  for (const auto& tr : out.report.triples) {
    out.ks.push_back(tr.ks);
    out.ks_err.push_back(tr.ks_err);
  }
  for (std::size_t i = 0; i + 1 < out.ks.size(); ++i) {
    if (std::isnan(out.ks[i]) || std::isnan(out.ks[i + 1])) {
      out.monotone_within_error = false;
      break;
    }
    const double slack = 2.0 * std::hypot(out.ks_err[i], out.ks_err[i + 1]);
    if (out.ks[i + 1] > out.ks[i] + slack) {
      out.monotone_within_error = false;
      out.report.flags.push_back("KsNotMonotone(rung=" + std::to_string(i + 1) +
                                 ")");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void serialize_report(const ComparisonReport& report,
                      const std::string& format, const std::string& path) {
  if (format == "csv") {
    std::ofstream out(path);
    if (!out) throw SerializationError("cannot open " + path + " for writing");
    out << "regime,alpha,beta,c,t,theta,n,k,r,w,y,emp_cdf,emp_err,theory_cdf,"
           "ks,seed\n";
    for (const auto& tr : report.triples) {
      for (std::size_t i = 0; i < tr.y.size(); ++i) {
        out << to_string(report.regime) << "," << fmt_double(report.alpha)
            << "," << fmt_double(report.beta) << "," << fmt_double(report.c)
            << "," << fmt_double(report.t) << "," << fmt_double(report.theta)
            << "," << tr.triple.n << "," << tr.triple.k << "," << tr.triple.r
            << "," << fmt_double(report.w) << "," << fmt_double(tr.y[i]) << ","
            << fmt_double(tr.emp[i]) << "," << fmt_double(tr.emp_err[i]) << ","
            << fmt_double(tr.theory[i]) << "," << fmt_double(tr.ks) << ","
            << report.seed << "\n";
      }
    }
    if (!out) throw SerializationError("failed writing " + path);
    return;
  }
  if (format == "json") {
    ordered_json j;
    j["schema_version"] = report.schema_version;
    j["regime"] = to_string(report.regime);
    j["alpha"] = report.alpha;
    j["beta"] = report.beta;
    j["c"] = report.c;
    j["t"] = report.t;
    j["theta"] = report.theta;
    j["w"] = report.w;
    j["sampler"] = report.sampler == SamplerMethod::rejection ? "rejection"
                                                              : "htransform";
    j["seed"] = report.seed;
    j["threads"] = report.threads;
    j["label"] = report.label;
    j["flags"] = report.flags;
    j["triples"] = ordered_json::array();
    for (const auto& tr : report.triples) {
      ordered_json t;
      t["n"] = tr.triple.n;
      t["k"] = tr.triple.k;
      t["r"] = tr.triple.r;
      t["attempts"] = tr.attempts;
      t["acceptance_rate"] = tr.acceptance_rate;
      t["ess"] = tr.ess;
      t["shortfall"] = tr.shortfall;
      t["ks"] = tr.ks;
      t["ks_err"] = tr.ks_err;
      t["localization"] = tr.localization;
      t["localization_tail"] = tr.localization_tail;
      t["y"] = tr.y;
      t["emp_cdf"] = tr.emp;
      t["emp_err"] = tr.emp_err;
      t["theory_cdf"] = tr.theory;
      j["triples"].push_back(std::move(t));
    }
    std::ofstream out(path);
    if (!out) throw SerializationError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw SerializationError("failed writing " + path);
    return;
  }
  throw SerializationError("unknown report format '" + format +
                           "' (expected csv or json)");
}

ComparisonReport load_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SerializationError("cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SerializationError("invalid JSON in " + path + ": " + e.what());
  }
  ComparisonReport report;
  try {
    report.schema_version = j.at("schema_version").get<int>();
    report.regime = regime_from_string(j.at("regime").get<std::string>());
    report.alpha = j.at("alpha").get<double>();
    report.beta = j.at("beta").get<double>();
    report.c = j.at("c").get<double>();
    report.t = j.at("t").get<double>();
    report.theta = j.at("theta").get<double>();
    report.w = j.at("w").get<double>();
    report.sampler = j.at("sampler").get<std::string>() == "htransform"
                         ? SamplerMethod::htransform
                         : SamplerMethod::rejection;
    report.seed = j.at("seed").get<std::uint64_t>();
    report.threads = j.at("threads").get<int>();
    report.label = j.at("label").get<std::string>();
    report.flags = j.at("flags").get<std::vector<std::string>>();
    for (const auto& t : j.at("triples")) {
      TripleResult tr;
      tr.triple.n = t.at("n").get<std::int64_t>();
      tr.triple.k = t.at("k").get<std::int64_t>();
      tr.triple.r = t.at("r").get<std::int64_t>();
      tr.attempts = t.at("attempts").get<std::uint64_t>();
      tr.acceptance_rate = t.at("acceptance_rate").get<double>();
      tr.ess = t.at("ess").get<double>();
      tr.shortfall = t.at("shortfall").get<bool>();
      tr.ks = t.at("ks").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                   : t.at("ks").get<double>();
      tr.ks_err = t.at("ks_err").get<double>();
      tr.localization = t.at("localization").get<double>();
      tr.localization_tail = t.at("localization_tail").get<double>();
      tr.y = t.at("y").get<std::vector<double>>();
      tr.emp = t.at("emp_cdf").get<std::vector<double>>();
      tr.emp_err = t.at("emp_err").get<std::vector<double>>();
      tr.theory = t.at("theory_cdf").get<std::vector<double>>();
      report.triples.push_back(std::move(tr));
    }
  } catch (const ordered_json::exception& e) {
    throw SerializationError("report schema mismatch in " + path + ": " +
                             e.what());
  }
  return report;
}

}  // namespace stablewalk
