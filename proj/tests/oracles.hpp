#ifndef CDLAB_TESTS_ORACLES_HPP
#define CDLAB_TESTS_ORACLES_HPP

// Brute-force quadrature oracles, independent of the closed-form reductions
// they check. Slow by design; keep the point counts small in unit tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cdlab/kernels.hpp"
#include "cdlab/quadrature.hpp"

namespace oracles {

using namespace cdlab;

// (f * g)(x) by adaptive quadrature on a seeded range, n = 1.
template <typename F, typename G>
double convolve_1d(F&& f, G&& g, double x, double range = 40.0) {
  quad::QuadratureSpec qs;
  qs.rel_tol = 1e-11;
  qs.abs_tol = 1e-13;
  qs.max_subdivisions = 20000;
  auto integrand = [&](double y) { return f(x - y) * g(y); };
  return quad::integrate(integrand, -range, range, qs).value;
}

// Inner integral of the Psi_* defining double integral, n = 1, with the
// panel seeds at the two Gaussian spikes.
inline double psi_inner_1d(double x, double s) {
  quad::QuadratureSpec qs;
  qs.rel_tol = 1e-10;
  qs.abs_tol = 1e-13;
  qs.max_subdivisions = 20000;
  double R = 12.0 * std::sqrt(s);
  std::vector<double> brk{-R, R};
  double w = 8.0 * std::sqrt(2.0 * (1.0 - s));
  for (double b : {x - w, x, x + w})
    if (b > -R && b < R) brk.push_back(b);
  std::sort(brk.begin(), brk.end());
  auto f = [&](double y) {
    double xy = x - y;
    return kernels::heat_g(&xy, 1.0 - s, 1) * kernels::f_kernel(&y, s, 1);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < brk.size(); ++i)
    total += quad::integrate(f, brk[i], brk[i + 1], qs).value;
  return total;
}

// S(x) = int_0^1 (G(1-s) * F(s))(x) ds, n = 1.
inline double psi_outer_1d(double x) {
  quad::QuadratureSpec qs;
  qs.rel_tol = 1e-10;
  qs.abs_tol = 1e-13;
  qs.max_subdivisions = 20000;
  auto bys = [&](double sig) { return 2.0 * sig * psi_inner_1d(x, sig * sig); };
  return quad::integrate(bys, 0.0, std::sqrt(1.0 - 1e-12), qs).value;
}

// Psi_*(x) by centered fourth-order differencing of d * dS/dx, n = 1.
inline double psi_star_brute_1d(double x, double d) {
  double h = 5e-3;
  double v = (-psi_outer_1d(x + 2 * h) + 8.0 * psi_outer_1d(x + h) - 8.0 * psi_outer_1d(x - h) +
              psi_outer_1d(x - 2 * h)) /
             (12.0 * h);
  return d * v;
}

// n = 2 version: iterated Cartesian quadrature of the defining integral.
inline double psi_inner_2d(double x0, double x1, double s) {
  quad::QuadratureSpec qs;
  qs.rel_tol = 1e-8;
  qs.abs_tol = 1e-12;
  qs.max_subdivisions = 4000;
  double R = 12.0 * std::sqrt(s);
  double w = 8.0 * std::sqrt(2.0 * (1.0 - s));
  auto seeds = [&](double c) {
    std::vector<double> brk{-R, R};
    for (double b : {c - w, c, c + w})
      if (b > -R && b < R) brk.push_back(b);
    std::sort(brk.begin(), brk.end());
    return brk;
  };
  auto inner_y0 = [&](double y1) {
    auto f = [&](double y0) {
      double xy[2] = {x0 - y0, x1 - y1};
      double yy[2] = {y0, y1};
      return kernels::heat_g(xy, 1.0 - s, 2) * kernels::f_kernel(yy, s, 2);
    };
    double total = 0.0;
    auto brk = seeds(x0);
    for (std::size_t i = 0; i + 1 < brk.size(); ++i)
      total += quad::integrate(f, brk[i], brk[i + 1], qs).value;
    return total;
  };
  double total = 0.0;
  auto brk = seeds(x1);
  for (std::size_t i = 0; i + 1 < brk.size(); ++i)
    total += quad::integrate(inner_y0, brk[i], brk[i + 1], qs).value;
  return total;
}

inline double psi_outer_2d(double x0, double x1) {
  quad::QuadratureSpec qs;
  qs.rel_tol = 1e-8;
  qs.abs_tol = 1e-12;
  auto bys = [&](double sig) { return 2.0 * sig * psi_inner_2d(x0, x1, sig * sig); };
  return quad::integrate(bys, 0.0, std::sqrt(1.0 - 1e-10), qs).value;
}

inline double psi_star_brute_2d(double x0, double x1, const std::vector<double>& d) {
  double h = 1e-2;
  double g0 = (-psi_outer_2d(x0 + 2 * h, x1) + 8.0 * psi_outer_2d(x0 + h, x1) -
               8.0 * psi_outer_2d(x0 - h, x1) + psi_outer_2d(x0 - 2 * h, x1)) /
              (12.0 * h);
  double g1 = (-psi_outer_2d(x0, x1 + 2 * h) + 8.0 * psi_outer_2d(x0, x1 + h) -
               8.0 * psi_outer_2d(x0, x1 - h) + psi_outer_2d(x0, x1 - 2 * h)) /
              (12.0 * h);
  return d[0] * g0 + d[1] * g1;
}

}  // namespace oracles

#endif
