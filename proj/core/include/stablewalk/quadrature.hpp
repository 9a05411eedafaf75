#pragma once

#include <functional>

namespace stablewalk {

struct QuadratureResult {
  double value;
  double error;  // estimated absolute error
};

// Adaptive Gauss–Kronrod (15-point) on a finite interval. Throws
// QuadratureFailure if the estimated absolute error exceeds abs_tol.
QuadratureResult integrate_finite(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol = 1e-8,
                                  int max_depth = 15);

// tanh-sinh on a finite interval; robust to integrable endpoint
// singularities (e.g. q^{p-1} with p in (0,1) at q = 0).
QuadratureResult integrate_finite_singular(
    const std::function<double(double)>& f, double a, double b,
    double abs_tol = 1e-8);

// exp-sinh on [a, inf); intended for exponentially decaying integrands.
QuadratureResult integrate_semi_infinite(const std::function<double(double)>& f,
                                         double a, double abs_tol = 1e-8);

}  // namespace stablewalk
