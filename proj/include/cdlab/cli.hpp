#ifndef CDLAB_CLI_HPP
#define CDLAB_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdlab/analysis.hpp"
#include "cdlab/config.hpp"
#include "cdlab/functionals.hpp"
#include "cdlab/grid.hpp"
#include "cdlab/solver.hpp"

namespace cdlab::cli {

/// Exit-code policy: 0 ok, 2 usage/config, 3 instability, 4 domain,
/// 5 incomplete input.
int exit_code_for(const Error& e);

/// In-memory result of one experiment; fields retained on request so tests
/// and the acceptance suite can verify without re-reading CSV.
struct RunResult {
  config::ExperimentConfig cfg;
  std::vector<double> snapshot_times;   // stored snapshots
  std::vector<grid::Field> fields;      // parallel to snapshot_times if kept
  functionals::Ledger ledger;
  functionals::ConstantSet constants;
  solver::Diagnostics diag;

  analysis::RunView view() const;  // valid while this object lives
};

RunResult run_experiment(const config::ExperimentConfig& cfg, bool write_outputs,
                         bool keep_fields);

/// Full verification over a run view; writes report.json / report.csv (and
/// plot scripts) under out_dir when write_outputs is set. Returns the report
/// as a JSON string (deterministic serialization).
std::string verify_run(const analysis::RunView& view, const config::ExperimentConfig& cfg,
                       const std::vector<std::string>& regimes, bool write_outputs,
                       const std::string& out_dir);

int cmd_run(const std::vector<std::string>& config_paths, int jobs, std::ostream& out);
int cmd_verify(const std::string& run_dir, const std::vector<std::string>& regime_override,
               std::ostream& out);
int cmd_report(const std::string& run_dir, std::ostream& out);

struct ProfileQuery {
  std::string name;  // f_star | psi_star | psi | v_exact | z_profile
  int n = 1;
  double q = 3.0;
  std::vector<double> d;
  std::vector<double> xs;  // sample abscissas (axis 0; other axes 0)
  std::vector<double> ts;  // times, empty for t-independent profiles
};

int cmd_profiles(const ProfileQuery& query, std::ostream& out);

}  // namespace cdlab::cli

#endif
