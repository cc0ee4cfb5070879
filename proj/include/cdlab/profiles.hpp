#ifndef CDLAB_PROFILES_HPP
#define CDLAB_PROFILES_HPP

#include <string>
#include <vector>

#include "cdlab/functionals.hpp"
#include "cdlab/grid.hpp"
#include "cdlab/model.hpp"
#include "cdlab/quadrature.hpp"

namespace cdlab::profiles {

enum class Regime {
  Subcritical,
  CriticalHighDim,  // n >= 2 form; also n = 1 with vanishing b
  CriticalOneDim,   // n = 1 form with K(t) and the Phi correction
  Supercritical,
  LinearOnly,
  IkUhat,
};

std::string regime_label(Regime r);
Regime regime_from_label(const std::string& s);

/// Regime implied by (n, q) for the expansion theorems.
Regime classify_regime(const model::ModelSpec& m);

// ---- point evaluators ----------------------------------------------------

/// Psi_*(x) = alpha_n int_0^{2/(n+2)} w^{-1} d.[grad G(x,1-w) - grad G(x,1)] dw,
/// the drift profile of the critical expansion. Odd in the d direction.
double psi_star(const double* x, int n, const std::vector<double>& d,
                const quad::QuadratureSpec& qs = {});

/// Psi(x,t) = t^{-n/2-1/2} Psi_*(x / sqrt(t)).
double psi(const double* x, double t, int n, const std::vector<double>& d,
           const quad::QuadratureSpec& qs = {});

/// v(x,t) = alpha_n int_1^t tau^{-1} d.grad G(x, t - tau (1 - 1/q)) dtau,
/// q = 1 + 2/n; requires t >= 2.
double v_exact(const double* x, double t, int n, const std::vector<double>& d,
               const quad::QuadratureSpec& qs = {});

/// Z(x,t) = int_0^t (4 pi tau)^{-n(q-1)/2} q^{-n/2} d.grad G(x, t - tau(1-1/q)) dtau
/// for the subcritical range 1 + 1/n < q < 1 + 2/n (endpoint substitution
/// keyed to the exponent). Throws Error("not subcritical") otherwise.
double z_profile(const double* x, double t, double q, int n, const std::vector<double>& d,
                 const quad::QuadratureSpec& qs = {});

/// The unified profile
///   uhat = M G(.,1+t) - c(t).grad G(.,1+t)
///          + |M|^{q-1} M int_0^t (d.grad G(t-tau) * G(1+tau)^q) dtau,
/// with c_i(t) = m1_i(t) + |M|^{q-1} M d_i Q(t) and Q the closed-form time
/// integral of the G^q mass.
double ik_uhat(const double* x, double t, double q, int n, const std::vector<double>& d,
               double M, const std::vector<double>& moment1_at_t,
               const quad::QuadratureSpec& qs = {});

// ---- bulk samplers (radial tables behind the same quadratures) -----------

grid::Field sample_heat(const grid::Grid& g, double t, double mass);
grid::Field sample_grad_g(const grid::Grid& g, double t, const std::vector<double>& coeff);
grid::Field sample_psi(const grid::Grid& g, double t, const std::vector<double>& d,
                       const quad::QuadratureSpec& qs = {});
grid::Field sample_v(const grid::Grid& g, double t, const std::vector<double>& d,
                     const quad::QuadratureSpec& qs = {});
grid::Field sample_z(const grid::Grid& g, double t, double q, const std::vector<double>& d,
                     const quad::QuadratureSpec& qs = {});
grid::Field sample_ik_uhat(const grid::Grid& g, double t, double q, const std::vector<double>& d,
                           double M, const std::vector<double>& moment1_at_t,
                           const quad::QuadratureSpec& qs = {});

// ---- expansions -----------------------------------------------------------

struct ExpansionSpec {
  Regime regime = Regime::LinearOnly;
  int order = 3;  // 1 = leading term only
  const functionals::ConstantSet* constants = nullptr;
  int n = 1;
  double q = 3.0;
  std::vector<double> d;
  model::BSpec b;  // decides whether K(t) and Phi participate

  void check_consistent() const;  // regime vs (n, q)
};

struct ExpansionTerm {
  std::string name;
  double coefficient = 0.0;
};

struct ExpansionResult {
  grid::Field field;
  std::vector<ExpansionTerm> terms;
};

/// Sample the regime's expansion at time t on grid g. The ledger is needed
/// for the Phi correction and the uhat moment series; throws
/// Error("missing constant", <symbol>) when a required constant is absent.
ExpansionResult build_expansion(const ExpansionSpec& spec, double t, const grid::Grid& g,
                                const functionals::Ledger* ledger = nullptr,
                                const quad::QuadratureSpec& qs = {});

}  // namespace cdlab::profiles

#endif
