#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cdlab: convection-diffusion long-time asymptotics laboratory"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one or more experiment configs");
  std::vector<std::string> configs;
  int jobs = 1;
  run->add_option("configs", configs, "config files")->required();
  run->add_option("--jobs", jobs, "run configs concurrently");

  // profiles
  auto* prof = app.add_subcommand("profiles", "evaluate asymptotic profiles");
  cdlab::cli::ProfileQuery query;
  std::string xspec, tspec, out_path;
  prof->add_option("name", query.name, "f_star|psi_star|psi|v_exact|z_profile")->required();
  prof->add_option("--n", query.n, "dimension (1 or 2)");
  prof->add_option("--q", query.q, "nonlinearity exponent");
  prof->add_option("--d", query.d, "drift vector components");
  prof->add_option("--x", xspec, "abscissa: value or lo:hi:count");
  prof->add_option("--t", tspec, "comma-separated times");
  prof->add_option("--out", out_path, "output CSV path (default stdout)");

  // verify
  auto* ver = app.add_subcommand("verify", "verify theorems against a finished run");
  std::string run_dir;
  std::vector<std::string> regimes;
  ver->add_option("run_dir", run_dir, "run directory")->required();
  ver->add_option("--regimes", regimes, "override the config regime list");

  // report
  auto* rep = app.add_subcommand("report", "print a verification report summary");
  std::string rep_dir;
  rep->add_option("run_dir", rep_dir, "run directory with report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cdlab::cli::cmd_run(configs, jobs, std::cout);
    if (*prof) {
      // --x value | lo:hi:count
      if (!xspec.empty()) {
        auto c1 = xspec.find(':');
        if (c1 == std::string::npos) {
          query.xs = {std::stod(xspec)};
        } else {
          auto c2 = xspec.find(':', c1 + 1);
          if (c2 == std::string::npos) throw cdlab::Error("usage", "--x wants value or lo:hi:count");
          double lo = std::stod(xspec.substr(0, c1));
          double hi = std::stod(xspec.substr(c1 + 1, c2 - c1 - 1));
          int count = std::stoi(xspec.substr(c2 + 1));
          if (count < 2) throw cdlab::Error("usage", "--x count must be >= 2");
          for (int i = 0; i < count; ++i)
            query.xs.push_back(lo + (hi - lo) * i / (count - 1));
        }
      }
      if (!tspec.empty()) {
        std::size_t pos = 0;
        while (pos < tspec.size()) {
          std::size_t comma = tspec.find(',', pos);
          if (comma == std::string::npos) comma = tspec.size();
          query.ts.push_back(std::stod(tspec.substr(pos, comma - pos)));
          pos = comma + 1;
        }
      }
      if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw cdlab::Error("io", "cannot open " + out_path);
        return cdlab::cli::cmd_profiles(query, f);
      }
      return cdlab::cli::cmd_profiles(query, std::cout);
    }
    if (*ver) return cdlab::cli::cmd_verify(run_dir, regimes, std::cout);
    if (*rep) return cdlab::cli::cmd_report(rep_dir, std::cout);
  } catch (const cdlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cdlab::cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
