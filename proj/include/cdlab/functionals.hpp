#ifndef CDLAB_FUNCTIONALS_HPP
#define CDLAB_FUNCTIONALS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdlab/grid.hpp"
#include "cdlab/model.hpp"
#include "cdlab/quadrature.hpp"

namespace cdlab::functionals {

/// One snapshot of every solution-dependent integrand tracked during a run.
/// int_bgradu stores int b d_i u, evaluated as -int (d_i b) u with the
/// analytic gradient of b, one entry per axis.
struct LedgerRow {
  double t = 0.0;
  double mass = 0.0;
  std::vector<double> m1;
  double int_uq = 0.0;   // int sign(u)|u|^q
  double int_rho = 0.0;  // int (sign(u)|u|^q - sign(MG)|MG|^q)
  std::vector<double> int_bgradu;
  double l1 = 0.0, l2 = 0.0, linf = 0.0;
  double g_l1 = 0.0, g_l2 = 0.0, g_linf = 0.0;  // of |grad u|
};

struct Ledger {
  int n = 1;
  double q = 3.0;
  double M = 0.0;  // initial mass, fixes the MG comparison kernel
  std::vector<LedgerRow> rows;
  /// phi(., t) fields on the snapshot schedule (n = 1 runs with b != 0).
  std::vector<std::pair<double, grid::Field>> phi_snapshots;
  /// Memo for the Duhamel correction; verify evaluates the same times
  /// through several reports.
  mutable std::map<double, grid::Field> phi_cache;

  const LedgerRow* row_at(double t, double rel_tol = 1e-9) const;
};

struct ConstantSet {
  double M = 0.0;
  std::vector<double> m;                      // first moment of u0
  std::vector<double> mathM;                  // critical only
  std::optional<std::vector<double>> mathN;   // n >= 2
  std::optional<std::vector<double>> beta;    // supercritical
  std::optional<double> mathL;                // n = 1
  struct KRow {
    double t = 0.0, K = 0.0, mathK = 0.0;
  };
  std::vector<KRow> K_table;                  // n = 1, snapshot times > 1
  std::map<std::string, double> tails;        // truncation bounds per integral

  double K_at(double t) const;  // log-t interpolation in the table
};

/// Append one row at time t. Rows must be strictly increasing in t.
void accumulate(Ledger& ledger, double t, const grid::Field& u, const model::ModelSpec& m);

/// Time-quadrature of every integrand plus fitted-envelope tail bounds.
/// Throws Error("non-decaying integrand") when a required improper integral
/// does not show a decaying tail.
ConstantSet finalize_constants(const Ledger& ledger, const model::ModelSpec& m, double t_final);

/// phi(y,t) = b dx u - (int b dx u) G(., t); n = 1 only. Uses the ledger row
/// at t for the integral factor.
grid::Field phi_field(double t, const grid::Field& u, const Ledger& ledger,
                      const model::ModelSpec& m);

/// The correction profile as a Duhamel integral of the stored phi snapshots,
///   Phi(x,t) = int_0^t (dxG(t - tau) * phi(tau))(x) dtau,
/// with a sqrt(t - tau) substitution near the upper endpoint and log-linear
/// interpolation of phi between snapshots.
grid::Field phi_duhamel(double t_eval, const Ledger& ledger,
                        const quad::QuadratureSpec& spec = {});

/// Envelope tail integrals used by finalize_constants; exposed for tests.
double tail_integral_rho(double T);     // int_T^inf s^{-3/2} log(2+s) ds
double tail_integral_power(double T, double a);  // int_T^inf s^{-a} ds, a > 1

}  // namespace cdlab::functionals

#endif
