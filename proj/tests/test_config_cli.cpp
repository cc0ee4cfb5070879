#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cdlab/cli.hpp"
#include "cdlab/config.hpp"
#include "cdlab/runio.hpp"

using namespace cdlab;
namespace fs = std::filesystem;

namespace {

const char* kTinyCritical = R"(
model.n = 1
model.q = 3
model.d = 1
model.b.kind = zero
model.u0.kind = gaussian
model.u0.mass = 1
model.u0.width = 1
model.u0.center = -0.5
grid.points = 512
grid.auto_half_width = true
time.t_final = 60
verify.regimes = critical
verify.norms = 1,inf
verify.fit_window = 6,60
output.directory = )";

std::string tiny_config(const std::string& dir) { return std::string(kTinyCritical) + dir + "\n"; }

}  // namespace

TEST_CASE("all shipped presets parse and validate") {
  for (const char* name :
       {"heat_oracle_1d", "subcritical_1d_q2.5", "critical_1d_b0", "critical_1d_bvar",
        "critical_1d_dipole", "supercritical_1d_q4", "critical_2d_b0", "critical_2d_bvar"}) {
    std::string path = std::string(CDLAB_PRESET_DIR) + "/" + name + ".cfg";
    auto cfg = config::parse_file(path);
    CHECK(cfg.name == name);
    CHECK(cfg.points >= 16);
    CHECK(cfg.resolved_half_width() > 0.0);
  }
}

TEST_CASE("config validation errors name the offending key") {
  CHECK_THROWS_WITH_AS(config::parse_string("model.n = 1\n", "x"),
                       doctest::Contains("model.q"), Error);
  CHECK_THROWS_WITH_AS(
      config::parse_string("model.n = 1\nmodel.q = 1.0\nmodel.d = 1\ngrid.points = 64\n"
                           "grid.half_width = 10\ntime.t_final = 1\noutput.directory = /tmp/x\n",
                           "x"),
      doctest::Contains("q must exceed 1 + 1/n"), Error);
  CHECK_THROWS_WITH_AS(config::parse_string("model.n\n", "x"), doctest::Contains("key = value"),
                       Error);
  CHECK_THROWS_WITH_AS(config::parse_string("model.n = one\n", "x"),
                       doctest::Contains("not a number"), Error);
}

TEST_CASE("schedules: geometric snapshots, dense ledger segment, exact t = 1") {
  auto cfg = config::parse_string(tiny_config("/tmp/cdlab_sched"), "sched");
  auto snaps = cfg.snapshot_times();
  CHECK(snaps.front() == doctest::Approx(0.01));
  CHECK(snaps.back() == 60.0);
  for (std::size_t i = 1; i + 1 < snaps.size(); ++i)
    CHECK(snaps[i] / snaps[i - 1] == doctest::Approx(cfg.snapshot_ratio).epsilon(1e-12));
  auto ledger = cfg.ledger_times();
  CHECK(std::is_sorted(ledger.begin(), ledger.end()));
  bool has_one = false;
  for (double t : ledger)
    if (t == 1.0) has_one = true;
  CHECK(has_one);
  CHECK(ledger.size() > snaps.size());
}

TEST_CASE("exit codes map error kinds to the CLI contract") {
  CHECK(cli::exit_code_for(Error("config", "x")) == 2);
  CHECK(cli::exit_code_for(Error("regime/model mismatch", "x")) == 2);
  CHECK(cli::exit_code_for(Error("invalid time", "x")) == 2);
  CHECK(cli::exit_code_for(Error("instability", "x")) == 3);
  CHECK(cli::exit_code_for(Error("non-decaying integrand", "x")) == 3);
  CHECK(cli::exit_code_for(Error("domain", "x")) == 4);
  CHECK(cli::exit_code_for(Error("domain mismatch", "x")) == 4);
  CHECK(cli::exit_code_for(Error("incomplete", "x")) == 5);
  CHECK(cli::exit_code_for(Error("ledger gap", "x")) == 5);
}

TEST_CASE("profiles subcommand: values and validation") {
  {
    cli::ProfileQuery q;
    q.name = "f_star";
    q.n = 1;
    q.xs = {0.0};
    std::ostringstream out;
    CHECK(cli::cmd_profiles(q, out) == 0);
    double v = 0.0;
    std::sscanf(out.str().c_str(), "x,value\n0,%lf", &v);
    CHECK(v == doctest::Approx((1.0 - 1.0 / std::sqrt(3.0)) / (8.0 * std::pow(M_PI, 1.5)))
                   .epsilon(1e-10));
  }
  {
    cli::ProfileQuery q;
    q.name = "psi_star";
    q.n = 1;
    q.d = {1.0};
    q.xs = {0.0};
    std::ostringstream out;
    CHECK(cli::cmd_profiles(q, out) == 0);
    CHECK(out.str().find("0,0\n") != std::string::npos);
  }
  {
    cli::ProfileQuery q;
    q.name = "v_exact";
    q.n = 1;
    q.xs = {1.0};
    q.ts = {1.5};
    std::ostringstream out;
    try {
      cli::cmd_profiles(q, out);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(cli::exit_code_for(e) == 2);
    }
  }
  {
    cli::ProfileQuery q;
    q.name = "nonsense";
    std::ostringstream out;
    CHECK_THROWS_AS(cli::cmd_profiles(q, out), Error);
  }
}

TEST_CASE("field CSV round-trips bit-exactly") {
  grid::Grid g(1, 12.0, 64);
  grid::Field f = grid::sample(g, [](const double* x) { return std::sin(x[0]) * 0.1234567890123; },
                               2.5);
  fs::create_directories("/tmp/cdlab_io");
  runio::write_field_csv("/tmp/cdlab_io/f.csv", f);
  grid::Field r = runio::read_field_csv("/tmp/cdlab_io/f.csv");
  CHECK(r.grid.same_as(g));
  CHECK(r.time_tag.value() == 2.5);
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(r.values[k] == f.values[k]);
}

TEST_CASE("run, persist, load, verify: full round trip with determinism") {
  std::string dir_a = "/tmp/cdlab_rt_a";
  std::string dir_b = "/tmp/cdlab_rt_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  auto run_and_report = [&](const std::string& dir) {
    auto cfg = config::parse_string(tiny_config(dir), "tiny_rt");
    cli::RunResult res = cli::run_experiment(cfg, true, false);
    runio::LoadedRun loaded = runio::load_run(dir);
    return cli::verify_run(loaded.view(), loaded.cfg, loaded.cfg.regimes, true, dir);
  };
  std::string ra = run_and_report(dir_a);
  std::string rb = run_and_report(dir_b);
  CHECK(ra == rb);  // byte-identical report

  // ledger and constants round-trip through the run directory
  runio::LoadedRun loaded = runio::load_run(dir_a);
  CHECK(loaded.cfg.model.q == 3.0);
  CHECK(loaded.constants.M == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(!loaded.ledger.rows.empty());
  CHECK(fs::exists(fs::path(dir_a) / "report.json"));
  CHECK(fs::exists(fs::path(dir_a) / "report.csv"));

  // verify with an empty regime list is a usage error
  try {
    cli::verify_run(loaded.view(), loaded.cfg, {}, false, dir_a);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(cli::exit_code_for(e) == 2);
  }

  // regime/model mismatch: subcritical regime on a critical run
  try {
    cli::verify_run(loaded.view(), loaded.cfg, {"subcritical"}, false, dir_a);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == "regime/model mismatch");
    CHECK(cli::exit_code_for(e) == 2);
  }
}

TEST_CASE("load_run reports missing artifacts") {
  std::string dir = "/tmp/cdlab_missing";
  fs::remove_all(dir);
  fs::create_directories(dir);
  try {
    runio::load_run(dir);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == "incomplete");
    CHECK(std::string(e.what()).find("run.json") != std::string::npos);
    CHECK(std::string(e.what()).find("ledger.csv") != std::string::npos);
    CHECK(cli::exit_code_for(e) == 5);
  }
}
