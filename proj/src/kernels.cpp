#include "cdlab/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace cdlab::kernels {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

double sq_norm(const double* x, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += x[k] * x[k];
  return s;
}

void require_time(double t) {
  if (!(t > 0.0)) throw Error("invalid time", "heat kernel requires t > 0");
}
}  // namespace

double heat_g(const double* x, double t, int n) {
  require_time(t);
  double pref = std::pow(4.0 * kPi * t, -0.5 * n);
  return pref * std::exp(-sq_norm(x, n) / (4.0 * t));
}

double heat_g_radial(double r, double t, int n) {
  require_time(t);
  return std::pow(4.0 * kPi * t, -0.5 * n) * std::exp(-r * r / (4.0 * t));
}

void grad_heat_g(const double* x, double t, int n, double* g) {
  double v = heat_g(x, t, n);
  for (int k = 0; k < n; ++k) g[k] = -x[k] / (2.0 * t) * v;
}

void hess_heat_g(const double* x, double t, int n, double* h) {
  double v = heat_g(x, t, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d = (i == j) ? 1.0 : 0.0;
      h[i * n + j] = (x[i] * x[j] / (4.0 * t * t) - d / (2.0 * t)) * v;
    }
}

double alpha_n(int n) {
  return 1.0 / (4.0 * kPi) * std::pow(1.0 + 2.0 / n, -0.5 * n);
}

namespace {

// Pointwise value of coeff * d^a G(x, theta).
double term_eval(const GaussianTerm& tm, const double* x, int n) {
  double v = heat_g(x, tm.theta, n);
  int ord = tm.order();
  if (ord == 0) return tm.coeff * v;
  if (ord == 1) {
    int a = tm.deriv[0] >= 0 ? tm.deriv[0] : tm.deriv[1];
    return tm.coeff * (-x[a] / (2.0 * tm.theta)) * v;
  }
  int a = tm.deriv[0], b = tm.deriv[1];
  double d = (a == b) ? 1.0 : 0.0;
  return tm.coeff * (x[a] * x[b] / (4.0 * tm.theta * tm.theta) - d / (2.0 * tm.theta)) * v;
}

}  // namespace

double GaussianExpr::eval(const double* x) const {
  double s = 0.0;
  for (const auto& tm : terms) s += term_eval(tm, x, dim);
  return s;
}

double GaussianExpr::eval1(double x) const { return eval(&x); }

double GaussianExpr::integral() const {
  double s = 0.0;
  for (const auto& tm : terms)
    if (tm.order() == 0) s += tm.coeff;
  return s;
}

GaussianExpr GaussianExpr::scaled(double c) const {
  GaussianExpr out = *this;
  for (auto& tm : out.terms) tm.coeff *= c;
  return out;
}

GaussianExpr GaussianExpr::plus(const GaussianExpr& other) const {
  if (dim != other.dim) throw Error("dimension", "expression dimension mismatch");
  GaussianExpr out = *this;
  out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
  return out;
}

GaussianExpr gaussian_g(double theta, int n) {
  require_time(theta);
  return GaussianExpr{n, {GaussianTerm{1.0, {-1, -1}, theta}}};
}

GaussianExpr gaussian_dg(int axis, double theta, int n) {
  require_time(theta);
  return GaussianExpr{n, {GaussianTerm{1.0, {axis, -1}, theta}}};
}

GaussianExpr semigroup_convolve(const GaussianExpr& a, const GaussianExpr& b) {
  if (a.dim != b.dim) throw Error("dimension", "expression dimension mismatch");
  GaussianExpr out{a.dim, {}};
  out.terms.reserve(a.terms.size() * b.terms.size());
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) {
      if (ta.order() + tb.order() > 2)
        throw Error("order overflow", "convolution would exceed derivative order 2");
      GaussianTerm t{ta.coeff * tb.coeff, {-1, -1}, ta.theta + tb.theta};
      int k = 0;
      for (int d : {ta.deriv[0], ta.deriv[1], tb.deriv[0], tb.deriv[1]})
        if (d >= 0) t.deriv[static_cast<std::size_t>(k++)] = d;
      std::sort(t.deriv.begin(), t.deriv.begin() + k);
      out.terms.push_back(t);
    }
  return out;
}

GaussianExpr gq_reduce(double tau, double q, int n) {
  require_time(tau);
  if (!(q > 1.0)) throw Error("exponent", "gq_reduce requires q > 1");
  double coeff = std::pow(4.0 * kPi * tau, -0.5 * n * (q - 1.0)) * std::pow(q, -0.5 * n);
  return GaussianExpr{n, {GaussianTerm{coeff, {-1, -1}, tau / q}}};
}

double f_star_radial(double r, int n) {
  double q = 1.0 + 2.0 / n;
  double pref = 1.0 / (std::pow(2.0, n + 2) * std::pow(kPi, 0.5 * n + 1.0));
  double r2 = r * r;
  return pref * (std::exp(-0.25 * r2 * q) - std::pow(q, -0.5 * n) * std::exp(-0.25 * r2));
}

double f_star(const double* y, int n) { return f_star_radial(std::sqrt(sq_norm(y, n)), n); }

double f_kernel(const double* y, double s, int n) {
  require_time(s);
  double rs = std::sqrt(s);
  return std::pow(s, -0.5 * n - 1.0) * f_star_radial(std::sqrt(sq_norm(y, n)) / rs, n);
}

GaussianExpr f_kernel_expr(double s, int n) {
  require_time(s);
  double q = 1.0 + 2.0 / n;
  double c = alpha_n(n) / s;
  return GaussianExpr{
      n, {GaussianTerm{c, {-1, -1}, s / q}, GaussianTerm{-c, {-1, -1}, s}}};
}

}  // namespace cdlab::kernels
