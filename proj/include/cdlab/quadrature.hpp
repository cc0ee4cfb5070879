#ifndef CDLAB_QUADRATURE_HPP
#define CDLAB_QUADRATURE_HPP

#include <functional>
#include <string>

#include "cdlab/grid.hpp"

namespace cdlab::quad {

/// Endpoint handling applied before the adaptive pass.
enum class EndpointRule {
  None,
  SqrtUpper,   // substitute sigma = sqrt(b - x) near the upper endpoint
  SqrtLower,   // substitute sigma = sqrt(x - a) near the lower endpoint
};

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 4000;
  EndpointRule endpoint = EndpointRule::None;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod 15-point quadrature with interval bisection.
/// Throws Error("quadrature") carrying the achieved error estimate in the
/// message if the requested tolerance cannot be met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec = {});

/// Single non-adaptive GK15 pass on [a, b]; used by the adaptive driver
/// and handy for smooth short panels.
QuadratureResult gk15_panel(const std::function<double(double)>& f, double a, double b);

}  // namespace cdlab::quad

#endif
