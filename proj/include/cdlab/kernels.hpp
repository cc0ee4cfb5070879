#ifndef CDLAB_KERNELS_HPP
#define CDLAB_KERNELS_HPP

#include <array>
#include <vector>

#include "cdlab/grid.hpp"

namespace cdlab::kernels {

/// Heat kernel G(x,t) = (4 pi t)^{-n/2} exp(-|x|^2 / 4t) and derivatives.
/// `x` points at n doubles. Throws Error("invalid time") for t <= 0.
double heat_g(const double* x, double t, int n);
/// grad G, written into g[0..n).
void grad_heat_g(const double* x, double t, int n, double* g);
/// Hessian D^2 G, row-major n x n, written into h[0..n*n).
void hess_heat_g(const double* x, double t, int n, double* h);

/// Radial value of G at |x| = r (same formula, convenience for profiles).
double heat_g_radial(double r, double t, int n);

/// alpha_n = (1/4pi) (1 + 2/n)^{-n/2}, the critical G^q reduction constant.
double alpha_n(int n);

/// One term c * d^a G(x, theta), |a| <= 2. The multi-index is stored as up
/// to two axis indices (-1 = unused), e.g. {0,-1} = d/dx0, {0,1} = d2/dx0dx1.
struct GaussianTerm {
  double coeff;
  std::array<int, 2> deriv;  // sorted, -1 padded
  double theta;

  int order() const { return (deriv[0] >= 0 ? 1 : 0) + (deriv[1] >= 0 ? 1 : 0); }
};

/// Finite linear combination of heat-kernel derivatives at shifted times.
/// Closed under convolution; evaluation and integration are exact.
struct GaussianExpr {
  int dim = 1;
  std::vector<GaussianTerm> terms;

  double eval(const double* x) const;
  double eval1(double x) const;  // dim 1 convenience
  /// Integral over R^n: derivative terms drop out.
  double integral() const;
  GaussianExpr scaled(double c) const;
  GaussianExpr plus(const GaussianExpr& other) const;
};

GaussianExpr gaussian_g(double theta, int n);        // G(., theta)
GaussianExpr gaussian_dg(int axis, double theta, int n);  // d_axis G(., theta)

/// Exact heat-semigroup convolution: times add, coefficients multiply,
/// derivative indices concatenate. Throws Error("order overflow") if a
/// product term would exceed order 2.
GaussianExpr semigroup_convolve(const GaussianExpr& a, const GaussianExpr& b);

/// G(., tau)^q as a single-term expression:
///   (4 pi tau)^{-n(q-1)/2} q^{-n/2} G(., tau/q).
GaussianExpr gq_reduce(double tau, double q, int n);

/// F_*(y) from the critical-kernel definition,
///   F_*(y) = (1 / 2^{n+2} pi^{n/2+1}) { e^{-|y|^2 (1+2/n)/4}
///            - (1+2/n)^{-n/2} e^{-|y|^2/4} }.
double f_star(const double* y, int n);
double f_star_radial(double r, int n);

/// F(y,s) = s^{-n/2-1} F_*(y / sqrt(s)); requires s > 0.
double f_kernel(const double* y, double s, int n);

/// The same F(., s) as a GaussianExpr: alpha_n s^{-1} [G(., s/q) - G(., s)]
/// with q = 1 + 2/n.
GaussianExpr f_kernel_expr(double s, int n);

}  // namespace cdlab::kernels

#endif
