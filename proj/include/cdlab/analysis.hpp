#ifndef CDLAB_ANALYSIS_HPP
#define CDLAB_ANALYSIS_HPP

#include <functional>
#include <string>
#include <vector>

#include "cdlab/functionals.hpp"
#include "cdlab/grid.hpp"
#include "cdlab/model.hpp"
#include "cdlab/profiles.hpp"

namespace cdlab::analysis {

struct TheoreticalRate {
  double exponent = 0.0;
  bool has_log = false;
};

/// Decay exponent of the distance to M G for the given regime, the rate the
/// normalized residuals are scaled by. Throws
/// Error("below supercritical-mass threshold") for q <= 1 + 1/n.
TheoreticalRate theoretical_rate(profiles::Regime regime, int n, double p, double q);

struct RatePoint {
  double t = 0.0;
  double residual = 0.0;
  double normalized = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  double loglog_coeff = 0.0;
  bool used_log_regressor = false;
  double rss = 0.0;
  int npoints = 0;
};

/// OLS of log(value) on log(t) over [t_lo, t_hi]; an extra log(log t)
/// regressor captures logarithmic corrections. Requires >= 8 points and
/// positive values (Error("residual underflow") otherwise).
FitResult fit_rate(const std::vector<std::pair<double, double>>& series, double t_lo,
                   double t_hi, bool with_log_regressor);

struct TolerancePolicy {
  double slope_tol = 0.07;
  double trend_factor = 1.3;  // required decrease over the last decade
  double growth_tol = 0.05;   // allowed growth for boundedness claims
};

enum class Claim { SlopeMatch, DecayToZero, Bounded };

struct RateReport {
  std::string regime_id;
  int order = 1;
  std::string p_label;
  std::vector<RatePoint> series;
  FitResult fit;
  double theoretical_exponent = 0.0;
  bool has_log = false;
  bool log_normalized = false;
  Claim claim = Claim::DecayToZero;
  std::string verdict;  // "pass" / "fail"
  double margin = 0.0;
  std::string provenance_run;
  std::string provenance_constants;
};

/// Read-only access to a finished run, in memory or disk-backed.
struct RunView {
  const model::ModelSpec* model = nullptr;
  std::vector<double> times;  // snapshot times, ascending
  std::function<grid::Field(std::size_t)> load;
  const functionals::Ledger* ledger = nullptr;
  const functionals::ConstantSet* constants = nullptr;
  std::string run_id;
};

struct Window {
  double lo = 0.0, hi = 0.0;
};

/// Residual-norm series of u(t) against the regime expansion, normalized by
/// the theoretical rate (and its log factor where the theorem carries one),
/// fitted and judged. Throws Error("domain mismatch") when the expansion
/// tails fall outside the grid.
std::vector<RateReport> residual_series(const RunView& run, const profiles::ExpansionSpec& spec,
                                        const std::vector<grid::Norm>& ps, double t_min,
                                        const Window& fit_window, const TolerancePolicy& pol);

/// Fill verdict and margin on a drafted report.
void apply_verdict(RateReport& report, const TolerancePolicy& pol);

struct CStarResult {
  std::vector<RatePoint> lhs;
  double c_star = 0.0;
  double relative_gap = 0.0;  // at the final series time
};

/// Optimal-rate constant: C* = || (mathM + mathN - m).gradG(1) + |M|^{2/n} M Psi_* ||_p
/// against the normalized second-order residual.
CStarResult c_star_check(const RunView& run, const functionals::ConstantSet& cs, grid::Norm p,
                         double t_min);

struct LogDetect {
  bool prefers_log = false;
  double a_fit = 0.0;
  double c_fit = 0.0;
  double c_theory = 0.0;
  double rel_gap = 0.0;
  double bic_const = 0.0;
  double bic_log = 0.0;
};

/// Model comparison on residual * t^{-rate}: constant vs a + c log t, BIC
/// selected; c_theory = alpha_n |M|^{2/n} |M| |d| ||dhat.gradG(1)||_p.
LogDetect detect_log_term(const std::vector<RatePoint>& order1_series, const model::ModelSpec& m,
                          grid::Norm p, const Window& fit_window);

struct DecayCheck {
  std::string name;  // "u" or "grad_u"
  std::string p_label;
  std::vector<RatePoint> series;  // normalized ledger norms
  std::string verdict;
  double margin = 0.0;
};

/// Normalized solution / gradient norms from the ledger rows,
/// t^{(n/2)(1-1/p)} ||u|| and t^{(n/2)(1-1/p)+1/2} ||grad u||, judged bounded.
std::vector<DecayCheck> decay_checks(const functionals::Ledger& ledger,
                                     const model::ModelSpec& m, double t_lo,
                                     const TolerancePolicy& pol);

struct LogGrowthFit {
  double a = 0.0, c = 0.0;  // cumulative ~ a + c log t
  std::vector<RatePoint> series;
};

/// Cumulative int_0^t int |b dx u| from snapshots (n = 1), fitted against
/// a + c log t over the window.
LogGrowthFit abs_bgradu_growth(const RunView& run, const Window& fit_window);

/// Boundedness series for the Phi correction:
/// t^{(1/2)(1-1/p)+1/2} ||Phi(t)||_p over snapshot times >= t_min.
std::vector<RatePoint> phi_star_norms(const RunView& run, grid::Norm p, double t_min);

}  // namespace cdlab::analysis

#endif
