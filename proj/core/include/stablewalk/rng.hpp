#pragma once

#include <cmath>
#include <cstdint>

namespace stablewalk {

// SplitMix64 step; used for seeding and for deriving independent streams.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic per-stream seed derivation; mixing the stream index through
// two finalizer rounds keeps streams statistically independent of each other
// and of the base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  (void)splitmix64_next(s);
  std::uint64_t t = splitmix64_next(s);
  return t ^ base;
}

// xoshiro256++ (Blackman & Vigna). Fast, 256-bit state, passes BigCrush.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); safe as a log() argument.
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform_open()); }

  double normal();  // standard normal via the 128-layer ziggurat below

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

namespace detail {

// Marsaglia–Tsang ziggurat tables for the standard normal, widened to take a
// full 64-bit word per draw (layer index from the low 7 bits, signed value
// from the whole word).
struct ZigguratTables {
  std::uint64_t kn[128];
  double wn[128];
  double fn[128];

  ZigguratTables() {
    constexpr double m1 = 9223372036854775808.0;  // 2^63
    double dn = 3.442619855899;
    double tn = dn;
    const double vn = 9.91256303526217e-3;

    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint64_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint64_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

inline double Rng::normal() {
  const auto& z = detail::ziggurat();
  constexpr double r = 3.442619855899;
  for (;;) {
    const std::uint64_t u = next();
    const unsigned i = static_cast<unsigned>(u & 127u);
    const std::int64_t hz = static_cast<std::int64_t>(u);
    // Two's-complement magnitude; well-defined for INT64_MIN as well.
    const std::uint64_t az = hz < 0 ? ~u + 1 : u;
    if (az < z.kn[i]) return static_cast<double>(hz) * z.wn[i];
    if (i == 0) {
      // Tail beyond |x| = r, Marsaglia's exponential wedge method.
      double x, y;
      do {
        x = -std::log(uniform_open()) / r;
        y = -std::log(uniform_open());
      } while (y + y < x * x);
      return hz > 0 ? r + x : -(r + x);
    }
    const double x = static_cast<double>(hz) * z.wn[i];
    if (z.fn[i] + uniform() * (z.fn[i - 1] - z.fn[i]) <
        std::exp(-0.5 * x * x)) {
      return x;
    }
  }
}

}  // namespace stablewalk
