#ifndef CDLAB_CONFIG_HPP
#define CDLAB_CONFIG_HPP

#include <limits>
#include <string>
#include <vector>

#include "cdlab/grid.hpp"
#include "cdlab/model.hpp"

namespace cdlab::config {

/// Experiment definition parsed from the plain key-value format
/// (`section.key = value`, `#` comments). See README for the grammar.
struct ExperimentConfig {
  std::string name;  // run id; file stem by default
  model::ModelSpec model;

  // grid block
  double half_width = 0.0;
  int points = 0;
  bool auto_half_width = false;

  // time block
  double t_final = 0.0;
  double dt_init = 1e-3;
  double dt_growth = 1.05;
  double dt_rel_cap = 0.02;
  double dt_abs_cap = std::numeric_limits<double>::infinity();
  double cfl = 0.4;
  double snapshot_ratio = 1.0905077326652577;  // 2^(1/8)
  double snapshot_t0 = 0.01;
  double ledger_t0 = 1e-3;
  double ledger_refine = 10.0;  // denser sub-schedule factor on [0, 1]
  double snapshot_min_store_t = 0.0;

  // verify block
  std::vector<std::string> regimes;
  std::vector<grid::Norm> norms{grid::Norm::L1, grid::Norm::Linf};
  double fit_lo = 0.0, fit_hi = 0.0;  // 0 = auto ([t_final/20, t_final])
  double slope_tol = 0.07;
  double trend_factor = 1.3;
  double growth_tol = 0.05;
  double verify_t_min = 2.0;

  // output block
  std::string out_dir;
  bool emit_plots = false;

  double resolved_half_width() const;
  std::vector<double> snapshot_times() const;
  /// Snapshot times plus the denser sub-schedule on [ledger_t0, 1] and the
  /// exact point t = 1; these are the solver's forced times.
  std::vector<double> ledger_times() const;

  void validate() const;  // throws Error("config", ...)
};

ExperimentConfig parse_string(const std::string& text, const std::string& name);
ExperimentConfig parse_file(const std::string& path);

}  // namespace cdlab::config

#endif
