// stablewalk: conditioned stable random walks, ladder-renewal estimation,
// and window-minimum limit laws.
//
// Subcommands: limits, simulate, renewal, meander, constants, sweep, verify.
// Exit codes: 0 success, 1 invalid arguments/inputs, 2 computation failure,
// 3 acceptance criteria failed (verify only).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stablewalk/acceptance.hpp"
#include "stablewalk/experiment.hpp"
#include "stablewalk/rng.hpp"

namespace fs = std::filesystem;
using namespace stablewalk;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Common {
  double alpha = 2.0, beta = 0.0, c = 1.0;
  std::uint64_t seed = 20240715;
  std::string out_dir = "out";
  std::string config_file;
  int threads = 0;  // 0 = leave the environment's setting in place
};

void add_common(CLI::App* cmd, Common& c, bool require_alpha = true) {
  auto* a = cmd->add_option("--alpha", c.alpha, "stability index in (0, 2]");
  if (require_alpha) a->required();
  cmd->add_option("--beta", c.beta, "skewness in (-1, 1); 0 if alpha is 1 or 2");
  cmd->add_option("--c", c.c, "scale constant of the characteristic exponent");
  cmd->add_option("--seed", c.seed, "base RNG seed");
  cmd->add_option("--out", c.out_dir, "output directory");
  cmd->add_option("--threads", c.threads,
                  "worker threads (0 = honor OMP_NUM_THREADS)");
  cmd->add_option("--config", c.config_file,
                  "read option defaults from a key=value file "
                  "(command line takes precedence)");
}

std::string trim_copy(std::string s) {
  const auto notspace = [](unsigned char ch) { return std::isspace(ch) == 0; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

// Config files are handled by expansion before parsing (CLI11 only processes
// config files attached to the top-level command, not to subcommands): each
// file key becomes a --key=value token unless that option already appears on
// the command line, so flags beat the file and the file beats built-in
// defaults.
void expand_config_into_args(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file: " + path);
  std::unordered_set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  }
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim_copy(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line is not key=value: " + line);
    }
    const std::string key = trim_copy(line.substr(0, eq));
    std::string val = trim_copy(line.substr(eq + 1));
    if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') &&
        val.back() == val.front()) {
      val = val.substr(1, val.size() - 2);
    }
    if (key.empty()) throw DomainError("config line has empty key: " + line);
    if (given.count("--" + key) != 0U) continue;
    extra.push_back("--" + key + "=" + val);
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int recorded_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<double> parse_grid(const std::string& s) {
  // "lo:hi:step", endpoints inclusive.
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw DomainError("grid must be lo:hi:step, got '" + s + "'");
  }
  const double lo = std::stod(s.substr(0, c1));
  const double hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  const double step = std::stod(s.substr(c2 + 1));
  if (!(step > 0.0) || !(hi >= lo)) {
    throw DomainError("grid must satisfy hi >= lo and step > 0");
  }
  const auto count = static_cast<std::int64_t>(std::llround((hi - lo) / step));
  std::vector<double> grid;
  for (std::int64_t i = 0; i <= count; ++i) {
    grid.push_back(i == count ? hi : lo + step * static_cast<double>(i));
  }
  return grid;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Direction parse_direction(const std::string& s) {
  if (s == "ascending" || s == "asc") return Direction::ascending;
  if (s == "descending" || s == "desc") return Direction::descending;
  throw DomainError("direction must be ascending|descending, got '" + s + "'");
}

fs::path ensure_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::string self_path(const char* argv0) {
  std::error_code ec;
  const auto p = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) return p.string();
  return argv0;
}

// ---------------------------------------------------------------------------
// limits
// ---------------------------------------------------------------------------

struct LimitsArgs {
  Common common;
  std::string regime = "r3";
  double t = 1.0, theta = 1.0;
  std::string y_grid;  // lo:hi:step, empty = per-regime default
  std::int64_t resolution = 4096, paths = 100000;  // Monte Carlo routes
  std::int64_t meander_n = 1024, survivors = 5000; // histogram g^+ source
};

int run_limits(const LimitsArgs& a) {
  apply_threads(a.common.threads);
  const Regime regime = regime_from_string(a.regime);
  const Stable st(a.common.alpha, a.common.beta, a.common.c);
  const double T = a.t * std::pow(a.theta, 1.0 / st.alpha());

  std::vector<double> grid;
  if (!a.y_grid.empty()) {
    grid = parse_grid(a.y_grid);
  } else {
    double lo = 0.0, hi = 1.0;
    switch (regime) {
      case Regime::r1: lo = 0.0; hi = 4.0; break;
      case Regime::r2: lo = 0.0; hi = T; break;
      case Regime::r3: lo = 0.0; hi = a.t; break;
      case Regime::r4: lo = 0.0; hi = T; break;
      case Regime::r5: lo = -4.0; hi = 0.0; break;
    }
    const double step = (hi - lo) / 40.0;
    for (int i = 0; i <= 40; ++i) grid.push_back(lo + step * i);
  }

  // g^+ and C** are only needed by the early/balanced-window limits.
  MeanderDensity gplus = MeanderDensity::rayleigh(st.c());
  double css = 1.0 / std::sqrt(M_PI * st.c());
  if ((regime == Regime::r1 || regime == Regime::r2) && st.alpha() != 2.0) {
    const auto est = estimate_meander_density(st, Direction::ascending,
                                              a.meander_n, a.survivors,
                                              derive_seed(a.common.seed, 11));
    gplus = MeanderDensity::histogram(est);
    const double p = st.alpha() * (1.0 - st.rho());
    css = 1.0 / est.integral_zpow(p);
  }

  std::vector<double> values;
  values.reserve(grid.size());
  for (const double y : grid) {
    double v = 0.0;
    switch (regime) {
      case Regime::r1:
        v = limit_r1(st, gplus, css, y);
        break;
      case Regime::r2:
        v = limit_r2(st, gplus, css, a.t, a.theta, y);
        break;
      case Regime::r3:
        v = limit_r3(st, a.t, y);
        break;
      case Regime::r4:
        v = limit_r4(st, a.t, a.theta, y, a.resolution, a.paths,
                     derive_seed(a.common.seed, 12));
        break;
      case Regime::r5:
        v = limit_r5(st, y, a.resolution, a.paths,
                     derive_seed(a.common.seed, 13));
        break;
    }
    values.push_back(v);
  }

  const fs::path out = ensure_out(a.common.out_dir);
  const fs::path file = out / ("limits_" + a.regime + ".csv");
  std::ofstream f(file);
  if (!f) throw SerializationError("cannot open " + file.string());
  f << "# regime=" << a.regime << " alpha=" << fmt17(st.alpha())
    << " beta=" << fmt17(st.beta()) << " c=" << fmt17(st.c())
    << " t=" << fmt17(a.t) << " theta=" << fmt17(a.theta) << "\n";
  f << "# seed=" << a.common.seed << " threads=" << recorded_threads() << "\n";
  f << "y,value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f << fmt17(grid[i]) << "," << fmt17(values[i]) << "\n";
  }
  std::cout << "wrote " << file.string() << " (" << grid.size() << " rows)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  double w = 0.0, x = 1.0;
  std::int64_t n = 256;
  std::int64_t target = 1000;
  std::uint64_t max_attempts = 0;
  std::string method = "rejection";
  std::vector<std::int64_t> windows;
  std::string renewal_csv;  // htransform table; built ad hoc when empty
  std::int64_t renewal_walks = 2000;
  bool paths_csv = true;
};

int run_simulate(const SimulateArgs& a) {
  apply_threads(a.common.threads);
  const Stable st(a.common.alpha, a.common.beta, a.common.c);
  SamplerConfig cfg;
  cfg.target = a.target;
  cfg.max_attempts = a.max_attempts;
  cfg.seed = a.common.seed;
  cfg.window_starts = a.windows;
  cfg.throw_on_shortfall = false;

  const ConditioningEvent ev{a.x, a.n};
  ConditionedSample sample;
  if (a.method == "rejection") {
    sample = sample_conditioned_rejection(st, a.w, ev, cfg);
  } else if (a.method == "htransform") {
    RenewalTable vminus;
    if (!a.renewal_csv.empty()) {
      vminus = RenewalTable::load_csv(a.renewal_csv);
    } else {
      vminus = build_renewal_table(st, Direction::descending, a.renewal_walks,
                                   64, a.n, derive_seed(a.common.seed, 21));
    }
    sample = sample_conditioned_htransform(st, a.w, ev, vminus, cfg);
  } else {
    throw DomainError("method must be rejection|htransform, got '" + a.method +
                      "'");
  }

  const fs::path out = ensure_out(a.common.out_dir);
  ordered_json j;
  j["method"] = a.method;
  j["alpha"] = st.alpha();
  j["beta"] = st.beta();
  j["c"] = st.c();
  j["w"] = a.w;
  j["x"] = a.x;
  j["n"] = a.n;
  j["target"] = a.target;
  j["attempts"] = sample.attempts;
  j["accepted"] = sample.paths.size();
  j["acceptance_rate"] = sample.acceptance_rate;
  j["acceptance_se"] = sample.acceptance_se;
  j["ess"] = sample.ess;
  j["shortfall"] = sample.shortfall;
  j["seed"] = a.common.seed;
  j["threads"] = recorded_threads();
  {
    std::ofstream f(out / "simulate_summary.json");
    if (!f) throw SerializationError("cannot open simulate_summary.json");
    f << j.dump(2) << "\n";
  }

  if (a.paths_csv) {
    const fs::path file = out / "paths.csv";
    std::ofstream f(file);
    if (!f) throw SerializationError("cannot open " + file.string());
    f << "endpoint,running_max,weight,weight_h";
    for (const auto r : sample.window_starts) {
      f << ",min_" << r << ",argmin_" << r << ",start_" << r;
    }
    f << "\n";
    for (const auto& p : sample.paths) {
      f << fmt17(p.endpoint) << "," << fmt17(p.m_n) << "," << fmt17(p.weight)
        << "," << fmt17(p.weight_h);
      for (const auto& w : p.win) {
        f << "," << fmt17(w.l) << "," << w.tau << "," << fmt17(w.s_start);
      }
      f << "\n";
    }
  }
  std::cout << "accepted " << sample.paths.size() << " of target " << a.target
            << " (rate " << sample.acceptance_rate << ", ess " << sample.ess
            << (sample.shortfall ? ", SHORTFALL" : "") << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// renewal
// ---------------------------------------------------------------------------

struct RenewalArgs {
  Common common;
  std::string direction = "both";
  std::int64_t walks = 5000, k_start = 128, n_max = 2048;
};

int run_renewal(const RenewalArgs& a) {
  apply_threads(a.common.threads);
  const Stable st(a.common.alpha, a.common.beta, a.common.c);
  const fs::path out = ensure_out(a.common.out_dir);
  std::vector<Direction> dirs;
  if (a.direction == "both") {
    dirs = {Direction::ascending, Direction::descending};
  } else {
    dirs = {parse_direction(a.direction)};
  }
  for (const Direction dir : dirs) {
    const auto table = build_renewal_table(
        st, dir, a.walks, a.k_start, a.n_max,
        derive_seed(a.common.seed, dir == Direction::ascending ? 31 : 32));
    const fs::path file =
        out / (std::string("renewal_") + to_string(dir) + ".csv");
    table.save_csv(file.string());
    const double target = dir == Direction::ascending
                              ? st.alpha() * st.rho()
                              : st.alpha() * (1.0 - st.rho());
    std::cout << "wrote " << file.string() << " (depth " << table.depth
              << ", exponent " << table.exponent_fit << " +/- "
              << table.exponent_se << ", regular-variation target " << target
              << ")\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// meander
// ---------------------------------------------------------------------------

struct MeanderArgs {
  Common common;
  std::string direction = "ascending";
  std::int64_t n = 1024, survivors = 5000;
};

int run_meander(const MeanderArgs& a) {
  apply_threads(a.common.threads);
  const Stable st(a.common.alpha, a.common.beta, a.common.c);
  const fs::path out = ensure_out(a.common.out_dir);
  const Direction dir = parse_direction(a.direction);
  const auto est = estimate_meander_density(st, dir, a.n, a.survivors,
                                            derive_seed(a.common.seed, 41));
  const fs::path file =
      out / (std::string("meander_") + to_string(dir) + ".csv");
  est.save_csv(file.string());
  std::cout << "wrote " << file.string() << " (" << est.sample_size
            << " survivors at n = " << est.n << ", overflow mass "
            << est.overflow_mass << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

struct ConstantsArgs {
  Common common;
  std::string budget = "small";
};

int run_constants(const ConstantsArgs& a) {
  apply_threads(a.common.threads);
  const Stable st(a.common.alpha, a.common.beta, a.common.c);
  CacheBudgets budgets = a.budget == "smoke"  ? CacheBudgets::smoke()
                         : a.budget == "full" ? CacheBudgets::full()
                                              : CacheBudgets::full();
  if (a.budget == "small") {
    budgets.renewal_walks_a2 = 5000;
    budgets.renewal_walks_a15 = 2500;
    budgets.renewal_n_max = 2048;
    budgets.meander_n = 1024;
    budgets.meander_survivors = 5000;
    budgets.survival_walks = 1000000;
  } else if (a.budget != "smoke" && a.budget != "full") {
    throw DomainError("budget must be smoke|small|full, got '" + a.budget +
                      "'");
  }
  ArtifactCache cache(a.common.seed, budgets);
  const auto& vminus = cache.renewal(st, Direction::descending);
  const auto& vplus = cache.renewal(st, Direction::ascending);
  const auto& gplus = cache.meander(st, Direction::ascending);
  const auto& gminus = cache.meander(st, Direction::descending);
  const auto& sminus = cache.survival(st, Direction::descending);
  const auto& splus = cache.survival(st, Direction::ascending);
  const auto k =
      estimate_constants(st, vminus, vplus, gplus, gminus, sminus, splus);

  const fs::path out = ensure_out(a.common.out_dir);
  ordered_json j;
  j["alpha"] = st.alpha();
  j["beta"] = st.beta();
  j["c"] = st.c();
  j["rho"] = st.rho();
  j["budget"] = a.budget;
  j["seed"] = a.common.seed;
  j["threads"] = recorded_threads();
  j["c_star"] = {{"integral", k.c_star},
                 {"integral_se", k.c_star_se},
                 {"product", k.c_star_product},
                 {"product_se", k.c_star_product_se}};
  j["c_star_star"] = {{"integral", k.c_star_star},
                      {"integral_se", k.c_star_star_se},
                      {"product", k.c_star_star_product},
                      {"product_se", k.c_star_star_product_se}};
  {
    std::ofstream f(out / "constants.json");
    if (!f) throw SerializationError("cannot open constants.json");
    f << j.dump(2) << "\n";
  }
  std::cout << "C*  = " << k.c_star << " (integral) / " << k.c_star_product
            << " (product)\nC** = " << k.c_star_star << " (integral) / "
            << k.c_star_star_product << " (product)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  Common common;
  std::string regime = "r3";
  double t = 1.0, theta = 1.0, w = 0.0;
  std::vector<std::int64_t> ns;
  std::string triples;  // "n:k:r,n:k:r,..." overrides --ns
  std::int64_t budget = 1000;
  std::uint64_t max_attempts = 0;
  std::string method = "rejection";
  std::string label;
  std::string y_grid;
  std::string cache_budget = "smoke";
};

int run_sweep(const SweepArgs& a) {
  apply_threads(a.common.threads);
  ExperimentPlan plan;
  plan.regime = regime_from_string(a.regime);
  plan.alpha = a.common.alpha;
  plan.beta = a.common.beta;
  plan.c = a.common.c;
  plan.t = a.t;
  plan.theta = a.theta;
  plan.w = a.w;
  plan.budget_per_triple = a.budget;
  plan.max_attempts_per_triple = a.max_attempts;
  plan.sampler = a.method == "htransform" ? SamplerMethod::htransform
                                          : SamplerMethod::rejection;
  if (a.method != "rejection" && a.method != "htransform") {
    throw DomainError("method must be rejection|htransform, got '" + a.method +
                      "'");
  }
  plan.seed = a.common.seed;
  plan.label = a.label.empty() ? a.regime : a.label;
  if (!a.y_grid.empty()) plan.y_grid = parse_grid(a.y_grid);

  if (!a.triples.empty()) {
    std::stringstream ss(a.triples);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Triple tr{};
      if (std::sscanf(item.c_str(), "%ld:%ld:%ld", &tr.n, &tr.k, &tr.r) != 3) {
        throw DomainError("triple must be n:k:r, got '" + item + "'");
      }
      plan.ladder.push_back(tr);
    }
  } else {
    std::vector<std::int64_t> ns = a.ns;
    if (ns.empty()) ns = {1024, 4096, 16384};
    for (const auto n : ns) {
      plan.ladder.push_back(default_triple(plan.regime, n, a.theta));
    }
  }

  CacheBudgets budgets = a.cache_budget == "full" ? CacheBudgets::full()
                                                  : CacheBudgets::smoke();
  ArtifactCache cache(a.common.seed, budgets);

  const fs::path out = ensure_out(a.common.out_dir);
  if (plan.ladder.size() >= 3) {
    const auto sweep = convergence_sweep(plan, &cache);
    serialize_report(sweep.report, "csv",
                     (out / (plan.label + "_sweep.csv")).string());
    serialize_report(sweep.report, "json",
                     (out / (plan.label + "_sweep.json")).string());
    std::cout << "ks ladder:";
    for (const double k : sweep.ks) std::cout << " " << k;
    std::cout << (sweep.monotone_within_error
                      ? " (nonincreasing within error)\n"
                      : " (NOT monotone within error)\n");
    for (const auto& flag : sweep.report.flags) {
      std::cout << "flag: " << flag << "\n";
    }
  } else {
    const auto report = run_experiment(plan, &cache);
    serialize_report(report, "csv",
                     (out / (plan.label + "_sweep.csv")).string());
    serialize_report(report, "json",
                     (out / (plan.label + "_sweep.json")).string());
    for (const auto& tr : report.triples) {
      std::cout << "n=" << tr.triple.n << " k=" << tr.triple.k
                << " r=" << tr.triple.r << " ks=" << tr.ks << "\n";
    }
    for (const auto& flag : report.flags) std::cout << "flag: " << flag << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  Common common;
  std::string budget = "small";
  std::vector<int> only;
  bool skip_repro = false;
  std::string cli_path;
};

int run_verify(const VerifyArgs& a) {
  apply_threads(a.common.threads);
  if (a.common.alpha != 2.0) {
    throw DomainError(
        "--alpha must be 2 (the acceptance suite pins its headline cases; "
        "other stability indices are exercised internally)");
  }
  AcceptanceOptions opts;
  opts.budget = budget_from_string(a.budget);
  opts.seed = a.common.seed;
  opts.out_dir = a.common.out_dir;
  opts.cli_path = a.cli_path;
  opts.only = a.only;
  opts.skip_reproducibility = a.skip_repro;
  opts.echo = true;

  std::cout << "acceptance: budget " << a.budget << ", seed " << a.common.seed
            << ", threads " << recorded_threads() << ", out "
            << a.common.out_dir << "\n";
  const auto results = run_acceptance(opts);
  const fs::path out = ensure_out(a.common.out_dir);
  save_acceptance_summary(results, opts,
                          (out / "acceptance_summary.json").string());
  int failed = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failed;
  }
  std::cout << (failed == 0 ? "ALL CRITERIA PASSED"
                            : std::to_string(failed) + " CRITERIA FAILED")
            << " (" << results.size() << " run)\n";
  return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "stablewalk: conditioned stable random walks, ladder renewal "
      "functions, and window-minimum limit laws"};
  app.require_subcommand(1);
  std::string top_config;
  app.add_option("--config", top_config,
                 "read option defaults from a key=value file");

  LimitsArgs limits;
  auto* cmd_limits = app.add_subcommand(
      "limits", "evaluate the limiting window-minimum CDFs on a grid");
  add_common(cmd_limits, limits.common);
  cmd_limits->add_option("--regime", limits.regime,
                         "window regime r1|r2|r3|r4|r5")->required();
  cmd_limits->add_option("--t", limits.t, "time horizon parameter t > 0");
  cmd_limits->add_option("--theta", limits.theta, "window ratio theta > 0");
  cmd_limits->add_option("--y-grid", limits.y_grid,
                         "evaluation grid lo:hi:step (default per regime)");
  cmd_limits->add_option("--resolution", limits.resolution,
                         "Monte Carlo path resolution (alpha < 2 routes)");
  cmd_limits->add_option("--paths", limits.paths,
                         "Monte Carlo ensemble size (alpha < 2 routes)");
  cmd_limits->add_option("--meander-n", limits.meander_n,
                         "meander horizon for the histogram g^+ source");
  cmd_limits->add_option("--survivors", limits.survivors,
                         "meander survivor count for the histogram source");

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand(
      "simulate", "sample walks conditioned to stay nonnegative with a "
                  "small endpoint");
  add_common(cmd_sim, sim.common);
  cmd_sim->add_option("--w", sim.w, "start value w >= 0");
  cmd_sim->add_option("--x", sim.x, "endpoint bound: S_n <= x");
  cmd_sim->add_option("--n", sim.n, "walk length")->required();
  cmd_sim->add_option("--target", sim.target, "accepted samples to collect");
  cmd_sim->add_option("--max-attempts", sim.max_attempts,
                      "attempt cap (0 = unbounded)");
  cmd_sim->add_option("--method", sim.method, "rejection|htransform");
  cmd_sim->add_option("--windows", sim.windows,
                      "window starts r whose minima to record");
  cmd_sim->add_option("--renewal-csv", sim.renewal_csv,
                      "renewal table CSV for the htransform proposal");
  cmd_sim->add_option("--renewal-walks", sim.renewal_walks,
                      "walks for the ad hoc htransform table");
  cmd_sim->add_flag("--paths-csv,!--no-paths-csv", sim.paths_csv,
                    "write per-path functionals CSV");

  RenewalArgs ren;
  auto* cmd_ren = app.add_subcommand(
      "renewal", "estimate ladder-height renewal functions");
  add_common(cmd_ren, ren.common);
  cmd_ren->add_option("--direction", ren.direction,
                      "ascending|descending|both");
  cmd_ren->add_option("--walks", ren.walks, "independent ladder walks");
  cmd_ren->add_option("--k-start", ren.k_start, "initial ladder depth");
  cmd_ren->add_option("--n-max", ren.n_max,
                      "largest horizon the table must cover");

  MeanderArgs mea;
  auto* cmd_mea = app.add_subcommand(
      "meander", "estimate the scaled conditioned-endpoint histogram");
  add_common(cmd_mea, mea.common);
  cmd_mea->add_option("--direction", mea.direction, "ascending|descending");
  cmd_mea->add_option("--n", mea.n, "walk length");
  cmd_mea->add_option("--survivors", mea.survivors, "survivors to collect");

  ConstantsArgs con;
  auto* cmd_con = app.add_subcommand(
      "constants", "estimate the asymptotic constants by two routes");
  add_common(cmd_con, con.common);
  cmd_con->add_option("--budget", con.budget, "smoke|small|full");

  SweepArgs swp;
  auto* cmd_swp = app.add_subcommand(
      "sweep", "compare conditioned-walk functionals with their limits "
               "along a ladder of horizons");
  add_common(cmd_swp, swp.common);
  cmd_swp->add_option("--regime", swp.regime, "window regime r1|r2|r3|r4|r5")
      ->required();
  cmd_swp->add_option("--t", swp.t, "time horizon parameter t > 0");
  cmd_swp->add_option("--theta", swp.theta, "window ratio theta > 0");
  cmd_swp->add_option("--w", swp.w, "start value w >= 0");
  cmd_swp->add_option("--ns", swp.ns,
                      "horizons (default triples per regime)");
  cmd_swp->add_option("--triples", swp.triples,
                      "explicit ladder n:k:r,n:k:r,... (overrides --ns)");
  cmd_swp->add_option("--budget-per-triple", swp.budget,
                      "target accepted samples per rung");
  cmd_swp->add_option("--max-attempts", swp.max_attempts,
                      "attempt cap per rung (0 = unbounded)");
  cmd_swp->add_option("--method", swp.method, "rejection|htransform");
  cmd_swp->add_option("--label", swp.label, "artifact file name stem");
  cmd_swp->add_option("--y-grid", swp.y_grid, "evaluation grid lo:hi:step");
  cmd_swp->add_option("--cache-budget", swp.cache_budget,
                      "smoke|full estimated-artifact budget");

  VerifyArgs ver;
  auto* cmd_ver = app.add_subcommand(
      "verify", "run the acceptance criteria and write a summary");
  add_common(cmd_ver, ver.common);
  cmd_ver->add_option("--budget", ver.budget, "smoke|small|full");
  cmd_ver->add_option("--only", ver.only, "criterion ids to run");
  cmd_ver->add_flag("--skip-repro", ver.skip_repro,
                    "skip the nested reproducibility criterion");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    expand_config_into_args(args);
  } catch (const Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());  // CLI11 takes reversed vectors
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_limits->parsed()) return run_limits(limits);
    if (cmd_sim->parsed()) return run_simulate(sim);
    if (cmd_ren->parsed()) return run_renewal(ren);
    if (cmd_mea->parsed()) return run_meander(mea);
    if (cmd_con->parsed()) return run_constants(con);
    if (cmd_swp->parsed()) return run_sweep(swp);
    if (cmd_ver->parsed()) {
      ver.cli_path = self_path(argv[0]);
      return run_verify(ver);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
    return e.error_class() == ErrorClass::validation ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
