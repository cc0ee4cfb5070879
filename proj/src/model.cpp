#include "cdlab/model.hpp"

#include <cmath>
#include <sstream>

#include "cdlab/kernels.hpp"

namespace cdlab::model {

double BSpec::value(const double* x, int n) const {
  switch (kind) {
    case BKind::Zero: return 0.0;
    case BKind::Constant: return amplitude;
    case BKind::PowerDecay: {
      double r2 = 0.0;
      for (int k = 0; k < n; ++k) r2 += x[k] * x[k];
      return amplitude * std::pow(1.0 + r2, -0.5 * delta);
    }
  }
  return 0.0;
}

void BSpec::grad(const double* x, int n, double* out) const {
  if (kind != BKind::PowerDecay) {
    for (int k = 0; k < n; ++k) out[k] = 0.0;
    return;
  }
  double r2 = 0.0;
  for (int k = 0; k < n; ++k) r2 += x[k] * x[k];
  double c = -amplitude * delta * std::pow(1.0 + r2, -0.5 * delta - 1.0);
  for (int k = 0; k < n; ++k) out[k] = c * x[k];
}

namespace {
double center_coord(const U0Spec& u0, int axis) {
  return axis < static_cast<int>(u0.center.size()) ? u0.center[static_cast<std::size_t>(axis)] : 0.0;
}
}  // namespace

double U0Spec::value(const double* x, int n) const {
  double xs[2] = {0.0, 0.0};
  for (int k = 0; k < n; ++k) xs[k] = x[k] - center_coord(*this, k);
  double v = 0.0;
  if (kind == U0Kind::Gaussian || kind == U0Kind::Sum)
    v += mass * kernels::heat_g(xs, width, n);
  if (kind == U0Kind::Dipole || kind == U0Kind::Sum) {
    double g[2];
    kernels::grad_heat_g(xs, dipole_width, n, g);
    v += dipole_scale * g[0];
  }
  return v;
}

double U0Spec::analytic_mass() const {
  return (kind == U0Kind::Dipole) ? 0.0 : mass;
}

std::vector<double> U0Spec::analytic_moment1(int n) const {
  std::vector<double> m(static_cast<std::size_t>(n), 0.0);
  if (kind == U0Kind::Gaussian || kind == U0Kind::Sum)
    for (int k = 0; k < n; ++k) m[static_cast<std::size_t>(k)] += mass * center_coord(*this, k);
  if (kind == U0Kind::Dipole || kind == U0Kind::Sum)
    m[0] += -dipole_scale;  // int x d/dx G = -int G = -1, shifted term drops out
  return m;
}

double U0Spec::support_radius(int n) const {
  double c = 0.0;
  for (int k = 0; k < n; ++k) c = std::max(c, std::abs(center_coord(*this, k)));
  double w = (kind == U0Kind::Gaussian) ? width : std::max(width, dipole_width);
  return c + 8.0 * std::sqrt(2.0 * w);
}

double ModelSpec::drift_norm() const {
  double s = 0.0;
  for (double v : d) s += v * v;
  return std::sqrt(s);
}

void ModelSpec::validate() const {
  if (n != 1 && n != 2) throw Error("config", "model.n must be 1 or 2");
  if (!(q > 1.0 + 1.0 / n)) throw Error("config", "q must exceed 1 + 1/n");
  if (static_cast<int>(d.size()) != n)
    throw Error("config", "model.d must have exactly n components");
  if (b.kind != BKind::Zero && !(std::abs(b.amplitude) < 1.0))
    throw Error("config", "|b amplitude| must be < 1");
  if (b.kind == BKind::PowerDecay && !(b.delta > 0.0))
    throw Error("config", "b.delta must be positive");
  if (u0.kind != U0Kind::Dipole && !(u0.width > 0.0))
    throw Error("config", "u0.width must be positive");
  if (u0.kind != U0Kind::Gaussian && !(u0.dipole_width > 0.0))
    throw Error("config", "u0.dipole_width must be positive");
  if (!u0.center.empty() && static_cast<int>(u0.center.size()) != n)
    throw Error("config", "u0.center must have n components");
}

double signed_power(double u, double q) {
  if (q == 2.0) return std::abs(u) * u;
  if (q == 3.0) return u * u * u;
  if (q == 4.0) {
    double a = std::abs(u);
    return a * a * a * u;
  }
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), q), u);
}

double signed_power_deriv(double u, double q) {
  if (q == 2.0) return 2.0 * std::abs(u);
  if (q == 3.0) return 3.0 * u * u;
  if (q == 4.0) {
    double a = std::abs(u);
    return 4.0 * a * a * a;
  }
  if (u == 0.0) return 0.0;
  return q * std::pow(std::abs(u), q - 1.0);
}

}  // namespace cdlab::model
