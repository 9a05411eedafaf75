#include "stablewalk/limit_laws.hpp"

#include <algorithm>
#include <cmath>

#include "stablewalk/errors.hpp"
#include "stablewalk/quadrature.hpp"
#include "stablewalk/rng.hpp"

namespace stablewalk {

namespace {

constexpr int kShards = 16;

std::int64_t shard_quota(std::int64_t count, int shard, int shards) {
  return count / shards + (shard < count % shards ? 1 : 0);
}

double pos_pow(double base, double p) {
  return base > 0.0 ? std::pow(base, p) : 0.0;
}

// P(min_{0<=s<=1} B_s <= a, B_1 <= c) for standard Brownian motion, by the
// reflection principle.
double brownian_min_joint(double a, double c) {
  if (a >= 0.0) return normal_cdf(c);   // the minimum is <= B_0 = 0 <= a
  if (c <= a) return normal_cdf(c);     // endpoint below a forces min <= a
  return 2.0 * normal_cdf(a) - normal_cdf(2.0 * a - c);
}

// P(-z <= min Y, min Y <= y - z, Y_1 <= t - z) for Y Brownian with
// Var Y_1 = 2c, i.e. Y = sigma B.
double joint_closed_a2(double sigma, double z, double y, double t) {
  const double hi = brownian_min_joint((y - z) / sigma, (t - z) / sigma);
  const double lo = brownian_min_joint(-z / sigma, (t - z) / sigma);
  return std::max(hi - lo, 0.0);
}

}  // namespace

double normal_cdf(double x) {
  // erfc keeps full double precision in both tails; the closed-form limit
  // routes are compared against reference values at ~1e-9, which a rational
  // approximation cannot hold.
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_cdf_ref(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// MeanderDensity
// ---------------------------------------------------------------------------

MeanderDensity MeanderDensity::rayleigh(double c) {
  if (!(c > 0.0)) throw DomainError("Rayleigh scale needs c > 0");
  MeanderDensity d;
  d.closed_form_ = true;
  d.sigma_ = std::sqrt(2.0 * c);
  return d;
}

MeanderDensity MeanderDensity::histogram(const MeanderDensityEstimate& est) {
  if (est.masses.size() != 64 || est.edges.size() != 65) {
    throw DomainError("histogram estimate has unexpected shape");
  }
  MeanderDensity d;
  d.closed_form_ = false;
  d.hist_ = std::make_shared<MeanderDensityEstimate>(est);
  return d;
}

ValueWithError MeanderDensity::integrate(
    const std::function<double(double)>& f,
    const std::vector<double>& breakpoints) const {
  if (closed_form_) {
    const double s = sigma_;
    const auto g = [&f, s](double z) {
      return f(z) * (z / (s * s)) * std::exp(-0.5 * z * z / (s * s));
    };
    const double hi = 10.0 * s;
    std::vector<double> nodes{0.0, hi};
    for (const double b : breakpoints) {
      if (b > 0.0 && b < hi) nodes.push_back(b);
    }
    std::sort(nodes.begin(), nodes.end());
    double value = 0.0, error = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const auto q = integrate_finite(g, nodes[i - 1], nodes[i], 1e-9);
      value += q.value;
      error += q.error;
    }
    return {value, error};
  }
  const auto& h = *hist_;
  double value = 0.0;
  double second = 0.0;
  for (std::size_t b = 0; b < 64; ++b) {
    const double mid = 0.5 * (h.edges[b] + h.edges[b + 1]);
    const double fv = f(mid);
    value += h.masses[b] * fv;
    second += h.masses[b] * fv * fv;
  }
  double bracket = 0.0;
  if (h.overflow_mass > 0.0) {
    // Conditional mean of f over a regularly varying tail with the
    // distribution's own index, by the substitution u = z_b / z.
    const double zb = h.edges.back();
    const double alpha = h.params.alpha;
    const auto g = [&f, zb, alpha](double u) {
      return f(zb / u) * alpha * std::pow(u, alpha - 1.0);
    };
    const auto q = integrate_finite_singular(g, 0.0, 1.0, 1e-7);
    const double tail_term = h.overflow_mass * q.value;
    value += tail_term;
    second += h.overflow_mass * q.value * q.value;
    bracket = std::abs(tail_term - h.overflow_mass * f(zb)) +
              h.overflow_mass * q.error;
  }
  const double var = std::max(second - value * value, 0.0);
  const double mc =
      h.sample_size > 1
          ? std::sqrt(var / static_cast<double>(h.sample_size))
          : 0.0;
  return {value, mc + bracket};
}

// ---------------------------------------------------------------------------
// Ensemble of discretized limit-process paths
// ---------------------------------------------------------------------------

LevyEnsemble simulate_levy_ensemble(const Stable& st, std::int64_t resolution,
                                    std::int64_t n_paths, std::uint64_t seed) {
  if (resolution < 1 || n_paths < 1) {
    throw DomainError("ensemble needs resolution >= 1 and n_paths >= 1");
  }
  LevyEnsemble out;
  out.resolution = resolution;
  out.n_paths = n_paths;
  out.seed = seed;
  out.min_scaled.resize(static_cast<std::size_t>(n_paths));
  out.end_scaled.resize(static_cast<std::size_t>(n_paths));
  const double inv_a = 1.0 / st.a(resolution);

#pragma omp parallel for schedule(dynamic, 1)
  for (int shard = 0; shard < kShards; ++shard) {
    const std::int64_t quota = shard_quota(n_paths, shard, kShards);
    std::int64_t off = 0;
    for (int s = 0; s < shard; ++s) off += shard_quota(n_paths, s, kShards);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(shard)));
    for (std::int64_t p = 0; p < quota; ++p) {
      double s = 0.0;
      double m = 0.0;
      for (std::int64_t i = 0; i < resolution; ++i) {
        s += st.sample(rng);
        if (s < m) m = s;
      }
      out.min_scaled[static_cast<std::size_t>(off + p)] = m * inv_a;
      out.end_scaled[static_cast<std::size_t>(off + p)] = s * inv_a;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Limit formulas
// ---------------------------------------------------------------------------

double limit_r1(const Stable& st, const MeanderDensity& gplus,
                double c_star_star, double y) {
  if (y <= 0.0) return 0.0;
  const double p = st.alpha() * (1.0 - st.rho());
  const auto f = [p, y](double z) {
    return std::pow(z, p) - pos_pow(z - y, p);
  };
  return std::min(c_star_star * gplus.integrate(f, {y}).value, 1.0);
}

double limit_r2(const Stable& st, const MeanderDensity& gplus,
                double c_star_star, double t, double theta, double y) {
  if (!(t > 0.0) || !(theta > 0.0)) throw DomainError("need t > 0, theta > 0");
  if (y <= 0.0) return 0.0;
  const double alpha = st.alpha();
  const double rho = st.rho();
  const double T = t * std::pow(theta, 1.0 / alpha);
  const double p_lo = alpha * rho;        // exponent on the q factor of I1
  const double p_hi = alpha * (1.0 - rho);
  const auto inner = [&](double z) -> double {
    const double lo = std::max({z - y, z - T, 0.0});
    if (!(z > lo)) return 0.0;
    const auto f1 = [&](double q) {
      return std::pow(q, p_lo) * pos_pow(T - z + q, p_hi);
    };
    const auto f2 = [&](double q) {
      return pos_pow(T - z + q, p_lo + 1.0) * std::pow(q, p_hi - 1.0);
    };
    // Absolute tolerances scaled by each integrand's magnitude bound on
    // [lo, z] (q <= z and T - z + q <= T there); a flat 1e-9 sits below the
    // tanh-sinh round-off floor once the integrals reach O(10).
    const double tol1 =
        1e-9 * std::max(1.0, std::pow(z, p_lo) * std::pow(T, p_hi) * (z - lo));
    const double tol2 =
        1e-9 *
        std::max(1.0, std::pow(T, p_lo + 1.0) * std::pow(z, p_hi) / p_hi);
    const double i1 = integrate_finite_singular(f1, lo, z, tol1).value;
    const double i2 = integrate_finite_singular(f2, lo, z, tol2).value;
    return (p_lo + 1.0) * i1 + p_hi * i2;
  };
  const double scale = c_star_star / std::pow(T, p_lo + 1.0);
  const double w = scale * gplus.integrate(inner, {y, T}).value;
  return std::clamp(w, 0.0, 1.0);
}

double limit_r3(const Stable& st, double t, double y) {
  if (!(t > 0.0)) throw DomainError("need t > 0");
  if (y <= 0.0) return 0.0;
  if (y >= t) return 1.0;
  const double p = st.alpha() * st.rho() + 1.0;
  return 1.0 - std::pow(1.0 - y / t, p);
}

double joint_min_endpoint_prob(const Stable& st, double z, double y, double t,
                               std::int64_t resolution, std::int64_t n_paths,
                               std::uint64_t seed) {
  if (z < 0.0) throw DomainError("need z >= 0");
  if (st.alpha() == 2.0) {
    return joint_closed_a2(std::sqrt(2.0 * st.c()), z, y, t);
  }
  const auto ens = simulate_levy_ensemble(st, resolution, n_paths, seed);
  std::int64_t cnt = 0;
  for (std::int64_t i = 0; i < ens.n_paths; ++i) {
    const double m = ens.min_scaled[static_cast<std::size_t>(i)];
    const double e = ens.end_scaled[static_cast<std::size_t>(i)];
    if (m >= -z && m <= y - z && e <= t - z) ++cnt;
  }
  return static_cast<double>(cnt) / static_cast<double>(ens.n_paths);
}

namespace {

// Per-path closed z-integral for the short-tail (r4) route: for a path with
// scaled
// minimum m <= 0 and endpoint e,
//   int_0^inf z^p 1{-z <= m <= y-z, e <= T-z} dz
//     = [ (min(y-m, T-e))^{p+1} - (-m)^{p+1} ]_+ / (p+1).
double r4_path_integral(double m, double e, double y, double T, double p) {
  const double u = std::min(y - m, T - e);
  const double l = -m;
  if (!(u > l)) return 0.0;
  return (std::pow(u, p + 1.0) - std::pow(l, p + 1.0)) / (p + 1.0);
}

struct McInt {
  double mean = 0.0;
  double se = 0.0;
};

template <typename F>
McInt ensemble_mean(const LevyEnsemble& ens, F&& per_path) {
  double s = 0.0, s2 = 0.0;
  for (std::int64_t i = 0; i < ens.n_paths; ++i) {
    const double v = per_path(ens.min_scaled[static_cast<std::size_t>(i)],
                              ens.end_scaled[static_cast<std::size_t>(i)]);
    s += v;
    s2 += v * v;
  }
  const auto n = static_cast<double>(ens.n_paths);
  McInt out;
  out.mean = s / n;
  out.se = std::sqrt(std::max(s2 / n - out.mean * out.mean, 0.0) / n);
  return out;
}

}  // namespace

double limit_r4(const Stable& st, double t, double theta, double y,
                std::int64_t resolution, std::int64_t n_paths,
                std::uint64_t seed) {
  if (!(t > 0.0) || !(theta > 0.0)) throw DomainError("need t > 0, theta > 0");
  if (y <= 0.0) return 0.0;
  const double alpha = st.alpha();
  const double p = alpha * st.rho();
  const double T = t * std::pow(theta, 1.0 / alpha);
  const double norm = (p + 1.0) / std::pow(T, p + 1.0);
  if (alpha == 2.0) {
    const double sigma = std::sqrt(2.0 * st.c());
    const auto g = [&](double z) {
      return std::pow(z, p) * joint_closed_a2(sigma, z, y, T);
    };
    // The reflection formula switches branches at z = y; integrate the two
    // smooth panels separately.
    const double hi = std::max(T, y) + 12.0 * sigma;
    const double mid = std::clamp(y, 0.0, hi);
    const double v = integrate_finite(g, 0.0, mid, 1e-10).value +
                     integrate_finite(g, mid, hi, 1e-10).value;
    return std::clamp(norm * v, 0.0, 1.0);
  }
  const auto per_path = [&](double m, double e) {
    return r4_path_integral(m, e, y, T, p);
  };
  const auto hi =
      ensemble_mean(simulate_levy_ensemble(st, 2 * resolution, n_paths,
                                           derive_seed(seed, 2)),
                    per_path);
  return std::clamp(norm * hi.mean, 0.0, 1.0);
}

double limit_r5(const Stable& st, double y, std::int64_t resolution,
                std::int64_t n_paths, std::uint64_t seed) {
  if (y >= 0.0) return 1.0;  // the running minimum is always <= Y_0 = 0
  if (st.alpha() == 2.0) {
    return 2.0 * normal_cdf(y / std::sqrt(2.0 * st.c()));
  }
  const auto ens = simulate_levy_ensemble(st, 2 * resolution, n_paths,
                                          derive_seed(seed, 2));
  std::int64_t cnt = 0;
  for (std::int64_t i = 0; i < ens.n_paths; ++i) {
    if (ens.min_scaled[static_cast<std::size_t>(i)] <= y) ++cnt;
  }
  return static_cast<double>(cnt) / static_cast<double>(ens.n_paths);
}

ValueWithError area_identity_residual(const Stable& st, double t,
                                      std::int64_t resolution,
                                      std::int64_t n_paths,
                                      std::uint64_t seed) {
  if (!(t > 0.0)) throw DomainError("need t > 0");
  const double p = st.alpha() * st.rho();
  const double rhs = std::pow(t, p + 1.0) / (p + 1.0);
  if (st.alpha() == 2.0) {
    const double sigma = std::sqrt(2.0 * st.c());
    const auto g = [&](double z) {
      const double pr = normal_cdf((t - z) / sigma) -
                        brownian_min_joint(-z / sigma, (t - z) / sigma);
      return std::pow(z, p) * std::max(pr, 0.0);
    };
    const double hi = t + 12.0 * sigma;
    const auto q = integrate_finite(g, 0.0, hi, 1e-10);
    return {std::abs(q.value - rhs), q.error};
  }
  const auto per_path = [&](double m, double e) {
    const double u = std::max(t - e, 0.0);
    const double l = -m;
    if (!(u > l)) return 0.0;
    return (std::pow(u, p + 1.0) - std::pow(l, p + 1.0)) / (p + 1.0);
  };
  const auto lo =
      ensemble_mean(simulate_levy_ensemble(st, resolution, n_paths,
                                           derive_seed(seed, 1)),
                    per_path);
  const auto hi =
      ensemble_mean(simulate_levy_ensemble(st, 2 * resolution, n_paths,
                                           derive_seed(seed, 2)),
                    per_path);
  return {std::abs(hi.mean - rhs), hi.se + std::abs(hi.mean - lo.mean)};
}

}  // namespace stablewalk
