#ifndef CDLAB_MODEL_HPP
#define CDLAB_MODEL_HPP

#include <cmath>
#include <string>
#include <vector>

#include "cdlab/grid.hpp"

namespace cdlab::model {

enum class BKind { Zero, Constant, PowerDecay };

/// Diffusion perturbation a(x) = 1 + b(x).
struct BSpec {
  BKind kind = BKind::Zero;
  double amplitude = 0.0;  // b0 (power_decay) or the constant value
  double delta = 1.0;      // power_decay only

  double value(const double* x, int n) const;
  void grad(const double* x, int n, double* out) const;
  bool is_zero() const { return kind == BKind::Zero || amplitude == 0.0; }
  bool is_constant() const { return kind != BKind::PowerDecay || amplitude == 0.0; }
  double sup_norm() const { return kind == BKind::Zero ? 0.0 : std::abs(amplitude); }
};

enum class U0Kind { Gaussian, Dipole, Sum };

/// Initial data. The gaussian part is mass * G(x - center, width), i.e. the
/// width parameter is a heat-kernel time, so pure diffusion evolves it to
/// mass * G(x - center, width + t) exactly. The dipole part is
/// scale * d/dx0 G(x - center, dipole_width), which integrates to zero.
struct U0Spec {
  U0Kind kind = U0Kind::Gaussian;
  double mass = 1.0;
  double width = 1.0;
  std::vector<double> center;  // length n; empty = origin
  double dipole_scale = 1.0;   // dipole & sum kinds
  double dipole_width = 1.0;

  double value(const double* x, int n) const;
  double analytic_mass() const;
  std::vector<double> analytic_moment1(int n) const;
  /// Radius beyond which the data is negligible (for box sizing).
  double support_radius(int n) const;
  bool is_derivative_form() const { return kind == U0Kind::Dipole; }
};

struct ModelSpec {
  int n = 1;
  double q = 3.0;
  std::vector<double> d;  // drift, length n
  BSpec b;
  U0Spec u0;

  double critical_q() const { return 1.0 + 2.0 / n; }
  bool is_critical() const { return std::abs(q - critical_q()) <= 1e-12; }
  bool is_subcritical() const { return q < critical_q() - 1e-12; }
  bool is_supercritical() const { return q > critical_q() + 1e-12; }
  double drift_norm() const;

  /// Throws Error("config", ...) on violated invariants.
  void validate() const;
};

/// Signed power sign(u) |u|^q with fast paths for integer q.
double signed_power(double u, double q);
/// Its derivative q |u|^{q-1}.
double signed_power_deriv(double u, double q);

}  // namespace cdlab::model

#endif
