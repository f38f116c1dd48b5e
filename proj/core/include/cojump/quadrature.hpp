#ifndef COJUMP_QUADRATURE_HPP
#define COJUMP_QUADRATURE_HPP

#include <functional>

namespace cojump {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  // estimated
  int evaluations = 0;
};

/// Adaptive 15-point Gauss-Kronrod integration on [a, b]: bisects the
/// interval with the largest error estimate until the total estimate drops
/// below abs_tol. Throws QuadratureFailure when max_intervals subdivisions
/// cannot reach the tolerance.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a,
                                double b, double abs_tol, int max_intervals = 4000);

}  // namespace cojump

#endif  // COJUMP_QUADRATURE_HPP
