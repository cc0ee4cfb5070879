#ifndef CDLAB_RUNIO_HPP
#define CDLAB_RUNIO_HPP

#include <string>
#include <vector>

#include "cdlab/analysis.hpp"
#include "cdlab/config.hpp"
#include "cdlab/functionals.hpp"
#include "cdlab/grid.hpp"
#include "cdlab/model.hpp"
#include "cdlab/solver.hpp"

namespace cdlab::runio {

/// Field CSV: header `# n=<n> L=<L> N=<N> t=<t>`, then `x[,y],value` rows.
void write_field_csv(const std::string& path, const grid::Field& f);
grid::Field read_field_csv(const std::string& path);

void write_ledger_csv(const std::string& path, const functionals::Ledger& ledger);
void read_ledger_csv(const std::string& path, functionals::Ledger& ledger);

void write_constants_json(const std::string& path, const functionals::ConstantSet& cs,
                          const model::ModelSpec& m);
functionals::ConstantSet read_constants_json(const std::string& path);

void write_run_json(const std::string& path, const config::ExperimentConfig& cfg,
                    const solver::Diagnostics& diag, const std::vector<double>& snapshot_times);

/// A run directory opened for verification. Snapshot fields load lazily;
/// phi snapshots are reconstructed from them when the model carries a
/// variable diffusion coefficient.
struct LoadedRun {
  std::string dir;
  std::string run_id;
  config::ExperimentConfig cfg;
  solver::Diagnostics diag;
  std::vector<double> snapshot_times;
  std::vector<std::string> snapshot_paths;
  functionals::Ledger ledger;
  functionals::ConstantSet constants;

  analysis::RunView view() const;
};

/// Throws Error("incomplete", <list of missing artifacts>) when run.json,
/// ledger.csv, constants.json or a listed snapshot is absent.
LoadedRun load_run(const std::string& dir);

std::string snapshot_filename(double t);
std::string format_double(double v);  // shortest round-trip decimal

}  // namespace cdlab::runio

#endif
