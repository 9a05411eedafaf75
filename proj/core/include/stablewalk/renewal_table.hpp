#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stablewalk/stable.hpp"

namespace stablewalk {

enum class Direction { ascending, descending };

inline const char* to_string(Direction d) {
  return d == Direction::ascending ? "ascending" : "descending";
}

// Renewal function of the weak ladder heights, tabulated on an increasing
// grid: V(x) = sum_k P(H_k <= x), with V(0) = 1 (continuous increments).
// Beyond the grid the table extrapolates by its fitted regular-variation
// exponent; below x_0 it interpolates linearly down to V(0) = 1.
struct RenewalTable {
  Direction dir = Direction::descending;
  StableParams params{2.0, 0.0, 0.5};
  std::vector<double> grid;     // x_0 < ... < x_M, all > 0
  std::vector<double> values;   // V(x_i) >= 1, nondecreasing
  std::vector<double> stderrs;  // bootstrap standard errors
  double exponent_fit = 0.0;    // log-log slope over the upper half grid
  double exponent_se = 0.0;
  std::int64_t depth = 0;       // ladder truncation depth K used
  std::int64_t n_walks = 0;
  std::uint64_t seed = 0;

  // V(x); 0 for x < 0, 1 at x = 0, interpolated/extrapolated elsewhere.
  double eval(double x) const;
  // integral of eval over [0, x] (composite trapezoid on a refined grid).
  double integral_to(double x) const;

  void save_csv(const std::string& path) const;
  static RenewalTable load_csv(const std::string& path);
};

}  // namespace stablewalk
