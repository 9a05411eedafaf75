#include "stablewalk/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "stablewalk/errors.hpp"
#include "stablewalk/rng.hpp"

namespace stablewalk {

namespace {

constexpr int kShards = 16;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Split "count" work items into deterministic shard quotas.
std::int64_t shard_quota(std::int64_t count, int shard, int shards) {
  return count / shards + (shard < count % shards ? 1 : 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// RenewalTable
// ---------------------------------------------------------------------------

double RenewalTable::eval(double x) const {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return 1.0;
  if (grid.empty()) throw DomainError("renewal table has an empty grid");
  if (x <= grid.front()) {
    return 1.0 + (values.front() - 1.0) * (x / grid.front());
  }
  if (x >= grid.back()) {
    const double e = exponent_fit;
    return values.back() * std::pow(x / grid.back(), e);
  }
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin());
  const double t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
  return values[i - 1] + t * (values[i] - values[i - 1]);
}

double RenewalTable::integral_to(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (grid.empty()) throw DomainError("renewal table has an empty grid");
  // The table is piecewise linear between knots and a power law beyond the
  // last one, so the integral is assembled segment by segment in closed form.
  double acc = 0.0;
  double prev_x = 0.0;
  double prev_v = 1.0;
  for (std::size_t i = 0; i < grid.size() && prev_x < x; ++i) {
    const double seg_x = std::min(grid[i], x);
    const double seg_v = eval(seg_x);
    acc += 0.5 * (prev_v + seg_v) * (seg_x - prev_x);
    prev_x = seg_x;
    prev_v = seg_v;
  }
  if (x > grid.back()) {
    const double e = exponent_fit;
    const double vM = values.back();
    const double xM = grid.back();
    if (std::abs(e + 1.0) < 1e-12) {
      acc += vM * xM * std::log(x / xM);
    } else {
      acc += vM * xM / (e + 1.0) * (std::pow(x / xM, e + 1.0) - 1.0);
    }
  }
  return acc;
}

void RenewalTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw SerializationError("cannot open " + path + " for writing");
  out << "# direction=" << to_string(dir) << "\n";
  out << "# alpha=" << fmt_double(params.alpha)
      << " beta=" << fmt_double(params.beta) << " c=" << fmt_double(params.c)
      << "\n";
  out << "# seed=" << seed << " n_walks=" << n_walks << " depth=" << depth
      << "\n";
  out << "# exponent_fit=" << fmt_double(exponent_fit)
      << " exponent_se=" << fmt_double(exponent_se) << "\n";
  out << "x,value,stderr\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << fmt_double(grid[i]) << "," << fmt_double(values[i]) << ","
        << fmt_double(stderrs[i]) << "\n";
  }
  if (!out) throw SerializationError("failed writing " + path);
}

RenewalTable RenewalTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SerializationError("cannot open " + path);
  RenewalTable t;
  std::string line;
  bool saw_header = false;
  auto parse_kv = [](const std::string& body,
                     std::vector<std::pair<std::string, std::string>>& kv) {
    std::istringstream is(body);
    std::string tok;
    while (is >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) {
        kv.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
      }
    }
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::vector<std::pair<std::string, std::string>> kv;
      parse_kv(line.substr(1), kv);
      for (const auto& [k, v] : kv) {
        if (k == "direction") {
          t.dir = v == "ascending" ? Direction::ascending
                                   : Direction::descending;
        } else if (k == "alpha") {
          t.params.alpha = std::stod(v);
        } else if (k == "beta") {
          t.params.beta = std::stod(v);
        } else if (k == "c") {
          t.params.c = std::stod(v);
        } else if (k == "seed") {
          t.seed = std::stoull(v);
        } else if (k == "n_walks") {
          t.n_walks = std::stoll(v);
        } else if (k == "depth") {
          t.depth = std::stoll(v);
        } else if (k == "exponent_fit") {
          t.exponent_fit = std::stod(v);
        } else if (k == "exponent_se") {
          t.exponent_se = std::stod(v);
        }
      }
      continue;
    }
    if (!saw_header) {
      if (line.rfind("x,value,stderr", 0) != 0) {
        throw SerializationError("unexpected column header in " + path);
      }
      saw_header = true;
      continue;
    }
    std::istringstream is(line);
    std::string fx, fv, fs;
    if (!std::getline(is, fx, ',') || !std::getline(is, fv, ',') ||
        !std::getline(is, fs, ',')) {
      throw SerializationError("malformed row in " + path + ": " + line);
    }
    t.grid.push_back(std::stod(fx));
    t.values.push_back(std::stod(fv));
    t.stderrs.push_back(std::stod(fs));
  }
  if (t.grid.empty()) throw SerializationError("no rows in " + path);
  return t;
}

// ---------------------------------------------------------------------------
// Ladder simulation
// ---------------------------------------------------------------------------

LadderSample simulate_ladder(const Stable& st, Direction dir, std::int64_t K,
                             std::uint64_t seed, std::int64_t step_cap) {
  if (K < 1) throw DomainError("ladder depth K must be >= 1");
  if (step_cap < 1) throw DomainError("step cap must be >= 1");
  LadderSample out;
  out.dir = dir;
  out.seed = seed;
  out.depth = K;
  out.epochs.reserve(static_cast<std::size_t>(K));
  out.heights.reserve(static_cast<std::size_t>(K));
  Rng rng(seed);
  const double sign = dir == Direction::descending ? -1.0 : 1.0;
  double s = 0.0;        // current walk value
  double record = 0.0;   // value at the previous ladder epoch
  std::int64_t n = 0;
  std::int64_t gap = 0;  // steps since the previous epoch
  while (static_cast<std::int64_t>(out.epochs.size()) < K) {
    s += st.sample(rng);
    ++n;
    ++gap;
    const bool is_epoch =
        dir == Direction::descending ? (s <= record) : (s >= record);
    if (is_epoch) {
      out.epochs.push_back(n);
      out.heights.push_back(sign * s);
      record = s;
      gap = 0;
    } else if (gap >= step_cap) {
      out.truncated = true;
      break;
    }
  }
  return out;
}

std::vector<double> default_renewal_grid(const Stable& st, std::int64_t n_max,
                                         int points) {
  if (n_max < 1 || points < 2) {
    throw DomainError("grid needs n_max >= 1 and points >= 2");
  }
  const double lo = st.a(1) / 8.0;
  const double hi = 4.0 * st.a(n_max);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Renewal estimation
// ---------------------------------------------------------------------------

RenewalTable estimate_renewal(const Stable& st, Direction dir,
                              const std::vector<LadderSample>& samples,
                              const std::vector<double>& grid) {
  if (samples.empty()) throw EmptySample("no ladder samples");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]) || !(grid[0] > 0.0)) {
      throw GridMismatch("renewal grid must be positive and increasing");
    }
  }
  const std::size_t N = samples.size();
  const std::size_t M = grid.size();
  const std::int64_t K_req = samples.front().depth;

  // Per-walk epoch counts and, per grid point, the number of ladder heights
  // at or below it (heights are nondecreasing, so this is an upper_bound).
  std::vector<std::uint32_t> k_of(N);
  std::vector<std::uint32_t> below(N * M);
  std::uint32_t k_max = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& h = samples[i].heights;
    if (samples[i].dir != dir) throw DomainError("mixed ladder directions");
    if (samples[i].depth != K_req) {
      throw DomainError("mixed ladder depths in one estimate");
    }
    k_of[i] = static_cast<std::uint32_t>(h.size());
    k_max = std::max(k_max, k_of[i]);
    for (std::size_t j = 0; j < M; ++j) {
      below[i * M + j] = static_cast<std::uint32_t>(
          std::upper_bound(h.begin(), h.end(), grid[j]) - h.begin());
    }
  }
  if (k_max == 0) throw EmptySample("no ladder epochs recorded");

  // Alive counts A_k and the prefix sums of 1/A_k that turn per-walk "number
  // of heights <= x" into the walk's contribution to V(x).
  auto prefix_inv_alive = [k_max](const std::vector<double>& alive) {
    std::vector<double> p(k_max + 1, 0.0);
    for (std::uint32_t k = 1; k <= k_max; ++k) {
      p[k] = p[k - 1] + (alive[k] > 0.0 ? 1.0 / alive[k] : 0.0);
    }
    return p;
  };
  auto alive_counts = [k_max, &k_of](const std::vector<double>& mult) {
    std::vector<double> alive(k_max + 1, 0.0);
    for (std::size_t i = 0; i < k_of.size(); ++i) {
      if (k_of[i] > 0) alive[k_of[i]] += mult[i];
    }
    for (std::uint32_t k = k_max; k >= 1; --k) {
      alive[k - 1] = alive[k] + alive[k - 1];
    }
    // alive[k] now counts walks with at least k epochs (index 0 unused).
    return alive;
  };

  std::vector<double> unit(N, 1.0);
  const auto alive = alive_counts(unit);
  const auto pinv = prefix_inv_alive(alive);

  RenewalTable table;
  table.dir = dir;
  table.params = st.params();
  table.grid = grid;
  table.depth = K_req;
  table.n_walks = static_cast<std::int64_t>(N);
  table.seed = samples.front().seed;
  table.values.resize(M);
  table.stderrs.assign(M, 0.0);
  for (std::size_t j = 0; j < M; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) acc += pinv[below[i * M + j]];
    table.values[j] = 1.0 + acc;
  }

  // Truncation rule: the conditional probability q_k = P(H_k <= x_M | alive)
  // decays in k; fit its dyadic decay rate and bound the beyond-K remainder
  // of the series by q_K * K / (s - 1).
  {
    const std::size_t jM = M - 1;
    auto q_at = [&](std::uint32_t k) -> double {
      if (k == 0 || k > k_max || alive[k] <= 0.0) return -1.0;
      double cnt = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        if (k_of[i] >= k && below[i * M + jM] >= k) cnt += 1.0;
      }
      return cnt / alive[k];
    };
    const auto K_eff = static_cast<std::uint32_t>(
        std::min<std::int64_t>(K_req, k_max));
    const double qK = q_at(K_eff);
    if (qK < 0.0) {
      throw TruncationTooSevere("no walks alive at the final ladder epoch");
    }
    if (qK > 0.0) {
      const double qH = q_at(K_eff / 2);
      const double vM = table.values[jM];
      if (qH <= 0.0 || qK >= qH) {
        throw TruncationTooSevere(
            "ladder-height series shows no decay at depth " +
            std::to_string(K_eff));
      }
      const double s = -std::log2(qK / qH);
      if (s <= 1.0) {
        throw TruncationTooSevere("tail decay exponent " + std::to_string(s) +
                                  " too shallow to bound the remainder");
      }
      const double tail = qK * static_cast<double>(K_eff) / (s - 1.0);
      if (tail >= 0.005 * vM) {
        throw TruncationTooSevere(
            "estimated beyond-depth remainder " + std::to_string(tail) +
            " exceeds 0.5% of V(x_max) = " + std::to_string(vM));
      }
    }
  }

  // Bootstrap over walks (alive counts recomputed per replicate).
  {
    const int B = 160;
    Rng rng(derive_seed(samples.front().seed, 0x626f6f74));  // "boot"
    std::vector<double> mult(N);
    std::vector<double> acc(M);
    std::vector<double> mean(M, 0.0), m2(M, 0.0);
    for (int b = 0; b < B; ++b) {
      std::fill(mult.begin(), mult.end(), 0.0);
      for (std::size_t i = 0; i < N; ++i) {
        mult[static_cast<std::size_t>(rng.next() % N)] += 1.0;
      }
      const auto alive_b = alive_counts(mult);
      const auto pinv_b = prefix_inv_alive(alive_b);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < N; ++i) {
        if (mult[i] == 0.0) continue;
        for (std::size_t j = 0; j < M; ++j) {
          acc[j] += mult[i] * pinv_b[below[i * M + j]];
        }
      }
      for (std::size_t j = 0; j < M; ++j) {
        const double v = 1.0 + acc[j];
        const double d = v - mean[j];
        mean[j] += d / (b + 1);
        m2[j] += d * (v - mean[j]);
      }
    }
    for (std::size_t j = 0; j < M; ++j) {
      table.stderrs[j] = std::sqrt(m2[j] / (B - 1));
    }
  }

  // Regular-variation exponent from the upper half of the grid.
  {
    const std::size_t j0 = M / 2;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto n_fit = static_cast<double>(M - j0);
    for (std::size_t j = j0; j < M; ++j) {
      const double lx = std::log(grid[j]);
      const double ly = std::log(table.values[j]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double den = n_fit * sxx - sx * sx;
    table.exponent_fit = (n_fit * sxy - sx * sy) / den;
    double rss = 0.0;
    const double icept = (sy - table.exponent_fit * sx) / n_fit;
    for (std::size_t j = j0; j < M; ++j) {
      const double r = std::log(table.values[j]) - icept -
                       table.exponent_fit * std::log(grid[j]);
      rss += r * r;
    }
    table.exponent_se =
        n_fit > 2 ? std::sqrt(rss / (n_fit - 2.0) * n_fit / den) : 0.0;
  }
  return table;
}

RenewalTable build_renewal_table(const Stable& st, Direction dir,
                                 std::int64_t n_walks, std::int64_t k_start,
                                 std::int64_t n_max, std::uint64_t seed) {
  if (n_walks < 2) throw DomainError("need at least two walks");
  const auto grid = default_renewal_grid(st, n_max);
  constexpr std::int64_t kDepthCap = 1 << 17;
  std::string last_reason = "depth cap reached";
  for (std::int64_t K = k_start; K <= kDepthCap; K *= 2) {
    std::vector<LadderSample> samples(static_cast<std::size_t>(n_walks));
    // Per-walk seeds do not depend on K, so doubling the depth extends the
    // same walks rather than drawing fresh ones.
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n_walks; ++i) {
      samples[static_cast<std::size_t>(i)] = simulate_ladder(
          st, dir, K, derive_seed(seed, static_cast<std::uint64_t>(i)));
    }
    try {
      RenewalTable table = estimate_renewal(st, dir, samples, grid);
      table.seed = seed;
      return table;
    } catch (const TruncationTooSevere& e) {
      last_reason = e.what();
    }
  }
  throw TruncationTooSevere("no admissible depth up to cap: " + last_reason);
}

// ---------------------------------------------------------------------------
// Meander marginal
// ---------------------------------------------------------------------------

MeanderDensityEstimate estimate_meander_density(const Stable& st,
                                                Direction dir, std::int64_t n,
                                                std::int64_t target_survivors,
                                                std::uint64_t seed) {
  if (n < 1) throw DomainError("meander horizon n must be >= 1");
  if (target_survivors < 1) throw DomainError("need at least one survivor");
  MeanderDensityEstimate out;
  out.dir = dir;
  out.params = st.params();
  out.n = n;
  out.seed = seed;
  out.edges.resize(65);
  for (int b = 0; b <= 64; ++b) out.edges[static_cast<std::size_t>(b)] = b / 16.0;
  std::vector<std::vector<std::int64_t>> counts(
      kShards, std::vector<std::int64_t>(65, 0));  // 64 bins + overflow
  const double a_n = st.a(n);
  // "Ascending" conditions the walk itself to stay nonnegative; "descending"
  // conditions the reflected walk, estimating the dual marginal.
  const double sign = dir == Direction::ascending ? 1.0 : -1.0;

#pragma omp parallel for schedule(dynamic, 1)
  for (int shard = 0; shard < kShards; ++shard) {
    const std::int64_t quota = shard_quota(target_survivors, shard, kShards);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(shard)));
    auto& sink = counts[static_cast<std::size_t>(shard)];
    std::int64_t got = 0;
    while (got < quota) {
      double s = 0.0;
      bool dead = false;
      for (std::int64_t i = 0; i < n; ++i) {
        s += sign * st.sample(rng);
        if (s < 0.0) {
          dead = true;
          break;
        }
      }
      if (dead) continue;
      const double z = s / a_n;
      const auto bin = static_cast<std::int64_t>(z * 16.0);
      ++sink[static_cast<std::size_t>(std::min<std::int64_t>(bin, 64))];
      ++got;
    }
  }

  std::vector<double> total(65, 0.0);
  double grand = 0.0;
  for (const auto& sink : counts) {
    for (std::size_t b = 0; b < 65; ++b) {
      total[b] += static_cast<double>(sink[b]);
      grand += static_cast<double>(sink[b]);
    }
  }
  out.sample_size = static_cast<std::int64_t>(grand);
  out.masses.resize(64);
  for (std::size_t b = 0; b < 64; ++b) out.masses[b] = total[b] / grand;
  out.overflow_mass = total[64] / grand;
  return out;
}

double MeanderDensityEstimate::integral_zpow(double p, double* error) const {
  double value = 0.0;
  double second = 0.0;
  for (std::size_t b = 0; b < 64; ++b) {
    const double mid = 0.5 * (edges[b] + edges[b + 1]);
    const double zp = std::pow(mid, p);
    value += masses[b] * zp;
    second += masses[b] * zp * zp;
  }
  // Overflow bracket: all mass at the boundary vs. a regularly varying tail
  // with the distribution's own index alpha (integrable since p < alpha).
  const double zb = edges.back();
  const double lo = overflow_mass * std::pow(zb, p);
  double hi = lo;
  const double alpha = params.alpha;
  if (overflow_mass > 0.0 && p > 0.0 && p < alpha) {
    hi = overflow_mass * std::pow(zb, p) * alpha / (alpha - p);
  }
  const double mid_over = 0.5 * (lo + hi);
  value += mid_over;
  second += overflow_mass > 0.0 ? mid_over * mid_over / overflow_mass : 0.0;
  if (error != nullptr) {
    const double bracket = 0.5 * (hi - lo);
    const double var = std::max(second - value * value, 0.0);
    const double mc =
        sample_size > 1 ? std::sqrt(var / static_cast<double>(sample_size))
                        : 0.0;
    *error = mc + bracket;
  }
  return value;
}

void MeanderDensityEstimate::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw SerializationError("cannot open " + path + " for writing");
  out << "# direction=" << to_string(dir) << "\n";
  out << "# alpha=" << fmt_double(params.alpha)
      << " beta=" << fmt_double(params.beta) << " c=" << fmt_double(params.c)
      << "\n";
  out << "# seed=" << seed << " n=" << n << " sample_size=" << sample_size
      << " overflow_mass=" << fmt_double(overflow_mass) << "\n";
  out << "z_lo,z_hi,mass\n";
  for (std::size_t b = 0; b < 64; ++b) {
    out << fmt_double(edges[b]) << "," << fmt_double(edges[b + 1]) << ","
        << fmt_double(masses[b]) << "\n";
  }
  if (!out) throw SerializationError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Epoch survival, constants, harmonicity, occupation sums
// ---------------------------------------------------------------------------

EpochSurvival estimate_epoch_survival(const Stable& st, Direction dir,
                                      std::vector<std::int64_t> ns,
                                      std::int64_t n_walks,
                                      std::uint64_t seed) {
  if (ns.empty()) throw DomainError("no horizons requested");
  std::sort(ns.begin(), ns.end());
  if (ns.front() < 1) throw DomainError("horizons must be >= 1");
  if (n_walks < 1) throw DomainError("need at least one walk");
  const std::int64_t n_top = ns.back();
  const std::size_t H = ns.size();
  std::vector<std::vector<std::int64_t>> past(
      kShards, std::vector<std::int64_t>(H, 0));

#pragma omp parallel for schedule(dynamic, 1)
  for (int shard = 0; shard < kShards; ++shard) {
    const std::int64_t quota = shard_quota(n_walks, shard, kShards);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(shard)));
    auto& sink = past[static_cast<std::size_t>(shard)];
    for (std::int64_t w = 0; w < quota; ++w) {
      double s = 0.0;
      std::int64_t tau = n_top + 1;
      for (std::int64_t i = 1; i <= n_top; ++i) {
        s += st.sample(rng);
        const bool hit = dir == Direction::descending ? (s <= 0.0) : (s >= 0.0);
        if (hit) {
          tau = i;
          break;
        }
      }
      for (std::size_t h = 0; h < H; ++h) {
        if (tau > ns[h]) ++sink[h];
      }
    }
  }

  EpochSurvival out;
  out.dir = dir;
  out.ns = ns;
  out.prob.resize(H);
  out.se.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    double cnt = 0.0;
    for (const auto& sink : past) cnt += static_cast<double>(sink[h]);
    const double p = cnt / static_cast<double>(n_walks);
    out.prob[h] = p;
    out.se[h] = std::sqrt(std::max(p * (1.0 - p), 0.0) /
                          static_cast<double>(n_walks));
  }
  return out;
}

namespace {

double table_stderr_at(const RenewalTable& t, double x) {
  if (t.grid.empty() || x <= 0.0) return 0.0;
  if (x >= t.grid.back()) {
    return t.stderrs.back() *
           std::pow(x / t.grid.back(), std::max(t.exponent_fit, 0.0));
  }
  const auto it = std::lower_bound(t.grid.begin(), t.grid.end(), x);
  const auto i = static_cast<std::size_t>(it - t.grid.begin());
  return t.stderrs[std::min(i, t.stderrs.size() - 1)];
}

}  // namespace

AsymptoticConstants estimate_constants(const Stable& st,
                                       const RenewalTable& vminus,
                                       const RenewalTable& vplus,
                                       const MeanderDensityEstimate& gplus,
                                       const MeanderDensityEstimate& gminus,
                                       const EpochSurvival& surv_minus,
                                       const EpochSurvival& surv_plus) {
  if (vminus.dir != Direction::descending ||
      vplus.dir != Direction::ascending ||
      gplus.dir != Direction::ascending ||
      gminus.dir != Direction::descending ||
      surv_minus.dir != Direction::descending ||
      surv_plus.dir != Direction::ascending) {
    throw DomainError("constants need (V^-, V^+, g^+, g^-, tau^-, tau^+)");
  }
  const double alpha = st.alpha();
  const double rho = st.rho();
  AsymptoticConstants out;

  // Integral route: reciprocal moments of the dual meander marginals.
  {
    double err = 0.0;
    const double inv = gminus.integral_zpow(alpha * rho, &err);
    out.c_star = 1.0 / inv;
    out.c_star_se = err / (inv * inv);
  }
  {
    double err = 0.0;
    const double inv = gplus.integral_zpow(alpha * (1.0 - rho), &err);
    out.c_star_star = 1.0 / inv;
    out.c_star_star_se = err / (inv * inv);
  }

  // Product route at the largest simulated horizon.
  {
    const std::size_t h = surv_plus.ns.size() - 1;
    const double a_n = st.a(surv_plus.ns[h]);
    const double p = surv_plus.prob[h];
    const double v = vplus.eval(a_n);
    out.c_star_product = p * v;
    out.c_star_product_se = std::hypot(surv_plus.se[h] * v,
                                       p * table_stderr_at(vplus, a_n));
  }
  {
    const std::size_t h = surv_minus.ns.size() - 1;
    const double a_n = st.a(surv_minus.ns[h]);
    const double p = surv_minus.prob[h];
    const double v = vminus.eval(a_n);
    out.c_star_star_product = p * v;
    out.c_star_star_product_se = std::hypot(surv_minus.se[h] * v,
                                            p * table_stderr_at(vminus, a_n));
  }

  const auto check = [](const char* name, double a, double sa, double b,
                        double sb) {
    const double tol = 3.0 * std::hypot(sa, sb);
    if (std::abs(a - b) > tol) {
      std::ostringstream os;
      os << name << ": integral route " << a << " +/- " << sa
         << " vs product route " << b << " +/- " << sb
         << " (|diff| > 3 combined sigma)";
      throw InconsistentEstimates(os.str());
    }
  };
  check("C*", out.c_star, out.c_star_se, out.c_star_product,
        out.c_star_product_se);
  check("C**", out.c_star_star, out.c_star_star_se, out.c_star_star_product,
        out.c_star_star_product_se);
  return out;
}

HarmonicityResult harmonicity_residual(const Stable& st,
                                       const RenewalTable& vminus,
                                       std::int64_t n, std::int64_t n_samples,
                                       std::uint64_t seed) {
  if (n < 1 || n_samples < 2) {
    throw DomainError("need n >= 1 and at least two samples");
  }
  std::vector<double> shard_sum(kShards, 0.0);
  std::vector<double> shard_sum2(kShards, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (int shard = 0; shard < kShards; ++shard) {
    const std::int64_t quota = shard_quota(n_samples, shard, kShards);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(shard)));
    double acc = 0.0, acc2 = 0.0;
    for (std::int64_t w = 0; w < quota; ++w) {
      double s = 0.0;
      bool dead = false;
      for (std::int64_t i = 0; i < n; ++i) {
        s += st.sample(rng);
        if (s < 0.0) {
          dead = true;
          break;
        }
      }
      const double v = dead ? 0.0 : vminus.eval(s);
      acc += v;
      acc2 += v * v;
    }
    shard_sum[static_cast<std::size_t>(shard)] = acc;
    shard_sum2[static_cast<std::size_t>(shard)] = acc2;
  }

  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < kShards; ++i) {
    s1 += shard_sum[static_cast<std::size_t>(i)];
    s2 += shard_sum2[static_cast<std::size_t>(i)];
  }
  const auto N = static_cast<double>(n_samples);
  const double mean = s1 / N;
  const double var = std::max(s2 / N - mean * mean, 0.0);
  return {mean - 1.0, std::sqrt(var / N)};
}

OccupationSum estimate_occupation_sum(const Stable& st, double x,
                                      std::int64_t K,
                                      std::vector<std::int64_t> tail_from,
                                      std::int64_t n_walks,
                                      std::uint64_t seed) {
  if (!(x > 0.0)) throw DomainError("x must be positive");
  if (K < 0 || n_walks < 2) throw DomainError("need K >= 0 and >= 2 walks");
  std::sort(tail_from.begin(), tail_from.end());
  for (const auto t : tail_from) {
    if (t < 0 || t > K) throw DomainError("tail cut outside [0, K]");
  }
  const std::size_t T = tail_from.size();
  std::vector<std::vector<double>> tot(kShards, std::vector<double>(2 + 2 * T, 0.0));

#pragma omp parallel for schedule(dynamic, 1)
  for (int shard = 0; shard < kShards; ++shard) {
    const std::int64_t quota = shard_quota(n_walks, shard, kShards);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(shard)));
    auto& sink = tot[static_cast<std::size_t>(shard)];
    std::vector<double> tails(T);
    for (std::int64_t w = 0; w < quota; ++w) {
      double cnt = x >= 0.0 ? 1.0 : 0.0;  // j = 0 term: S_0 = 0, L_0 = 0
      std::fill(tails.begin(), tails.end(), 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        if (tail_from[t] == 0) tails[t] = cnt;
      }
      double s = 0.0;
      for (std::int64_t j = 1; j <= K; ++j) {
        s += st.sample(rng);
        if (s < 0.0) break;
        if (s <= x) {
          cnt += 1.0;
          for (std::size_t t = 0; t < T; ++t) {
            if (j >= tail_from[t]) tails[t] += 1.0;
          }
        }
      }
      sink[0] += cnt;
      sink[1] += cnt * cnt;
      for (std::size_t t = 0; t < T; ++t) sink[2 + 2 * t] += tails[t];
      for (std::size_t t = 0; t < T; ++t) {
        sink[3 + 2 * t] += tails[t] * tails[t];
      }
    }
  }

  std::vector<double> sums(2 + 2 * T, 0.0);
  for (const auto& sink : tot) {
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += sink[i];
  }
  const auto N = static_cast<double>(n_walks);
  OccupationSum out;
  out.total = sums[0] / N;
  out.total_se = std::sqrt(
      std::max(sums[1] / N - out.total * out.total, 0.0) / N);
  out.tail_from = tail_from;
  out.tail_sums.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    out.tail_sums[t] = sums[2 + 2 * t] / N;
  }
  return out;
}

}  // namespace stablewalk
