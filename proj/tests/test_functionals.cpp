#include <doctest.h>

#include <cmath>

#include "cdlab/cli.hpp"
#include "cdlab/functionals.hpp"
#include "cdlab/grid.hpp"
#include "cdlab/kernels.hpp"
#include "cdlab/quadrature.hpp"

using namespace cdlab;
using grid::Field;
using grid::Grid;
using grid::Norm;

namespace {

model::ModelSpec critical_1d(bool with_b) {
  model::ModelSpec m;
  m.n = 1;
  m.q = 3.0;
  m.d = {1.0};
  if (with_b) {
    m.b.kind = model::BKind::PowerDecay;
    m.b.amplitude = 0.3;
    m.b.delta = 2.0;
  }
  return m;
}

// A small but genuine run for ledger-based tests.
cli::RunResult tiny_run(bool with_b, double t_final, const char* name) {
  char buf[700];
  snprintf(buf, sizeof(buf), R"(
model.n = 1
model.q = 3
model.d = 1
model.b.kind = %s
model.b.amplitude = 0.3
model.b.delta = 2
model.u0.kind = gaussian
model.u0.mass = 1
model.u0.width = 1
model.u0.center = -0.5
grid.points = 1024
grid.auto_half_width = true
time.t_final = %g
output.directory = /tmp/cdlab_test_run
)", with_b ? "power_decay" : "zero", t_final);
  return cli::run_experiment(config::parse_string(buf, name), false, true);
}

}  // namespace

TEST_CASE("accumulate: zero-b rows, zero-drift constants, MG injection") {
  Grid g(1, 40.0, 1024);
  model::ModelSpec m = critical_1d(false);

  functionals::Ledger ledger;
  ledger.n = 1;
  ledger.q = 3.0;
  // inject u = M G(., t) exactly
  const double M = 1.0;
  for (double t : {0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0})
    functionals::accumulate(ledger, t,
                            grid::sample(g, [&](const double* x) {
                              return M * kernels::heat_g(x, t, 1);
                            }, t),
                            m);
  CHECK(ledger.M == doctest::Approx(M).epsilon(1e-10));
  for (const auto& row : ledger.rows) {
    CHECK(std::abs(row.int_rho) <= 1e-12);            // rho vanishes on the profile
    CHECK(row.int_bgradu[0] == 0.0);                  // b = 0 exactly
  }

  CHECK_THROWS_WITH_AS(
      functionals::accumulate(ledger, 5.0, grid::sample(g, [](const double*) { return 0.0; }), m),
      doctest::Contains("strictly increasing"), Error);
}

TEST_CASE("d = 0 makes mathM the zero vector") {
  auto res = tiny_run(false, 120.0, "tiny");
  model::ModelSpec m0 = res.cfg.model;
  m0.d = {0.0};
  auto cs = functionals::finalize_constants(res.ledger, m0, 120.0);
  CHECK(cs.mathM[0] == 0.0);
}

TEST_CASE("exact-profile injection: mathM comes from [0,1] only") {
  Grid g(1, 40.0, 1024);
  model::ModelSpec m = critical_1d(false);
  functionals::Ledger ledger;
  ledger.n = 1;
  ledger.q = 3.0;
  double t = 0.01;
  while (t <= 120.0) {
    functionals::accumulate(ledger, t,
                            grid::sample(g, [&](const double* x) {
                              return kernels::heat_g(x, t, 1);
                            }, t),
                            m);
    t *= 1.15;
  }
  auto cs = functionals::finalize_constants(ledger, m, 120.0);
  // mathM_1 = 0, so mathM equals the [0,1] trapezoid of int G^3 = alpha_1/t
  functionals::Ledger upto1 = ledger;
  upto1.rows.erase(std::remove_if(upto1.rows.begin(), upto1.rows.end(),
                                  [](const functionals::LedgerRow& r) { return r.t > 1.0; }),
                   upto1.rows.end());
  grid::CompensatedSum trap;
  for (std::size_t i = 1; i < upto1.rows.size(); ++i)
    trap.add(0.5 * (upto1.rows[i].int_uq + upto1.rows[i - 1].int_uq) *
             (upto1.rows[i].t - upto1.rows[i - 1].t));
  // finalize interpolates up to exactly t = 1; the last stored row is below
  double resid = std::abs(cs.mathM[0] - trap.value());
  CHECK(resid <= 0.05 * std::abs(cs.mathM[0]));
  CHECK(cs.tails.at("mathM") <= 1e-10);  // rho rows are identically ~0
}

TEST_CASE("finalize on a real variable-b run: K split and mathL") {
  auto res = tiny_run(true, 120.0, "tinyb");
  const auto& cs = res.constants;
  REQUIRE(cs.mathL.has_value());
  REQUIRE(!cs.K_table.empty());
  for (const auto& kr : cs.K_table) {
    double lt = std::log(kr.t);
    CHECK(std::abs(kr.K * lt - (kr.mathK * lt + *cs.mathL)) <= 1e-14);
  }
  // b = 0 comparison: everything b-related vanishes
  auto res0 = tiny_run(false, 120.0, "tiny0");
  CHECK(res0.constants.mathL.value_or(0.0) == 0.0);
  for (const auto& kr : res0.constants.K_table) CHECK(kr.K == 0.0);
  REQUIRE(res0.constants.mathN.has_value());  // exactly zero for constant b
  CHECK((*res0.constants.mathN)[0] == 0.0);
  CHECK_FALSE(res.constants.mathN.has_value());  // divergent class: not reported
}

TEST_CASE("mathM is stable under doubling the horizon") {
  auto a = tiny_run(false, 120.0, "ta");
  auto b = tiny_run(false, 240.0, "tb");
  double tol = 2.0 * (a.constants.tails.at("mathM") + b.constants.tails.at("mathM"));
  CHECK(std::abs(a.constants.mathM[0] - b.constants.mathM[0]) <= tol + 1e-12);
}

TEST_CASE("non-decaying integrand is an error") {
  Grid g(1, 20.0, 64);
  model::ModelSpec m;
  m.n = 1;
  m.q = 4.0;  // supercritical: finalize needs the |u|^{q-1}u tail
  m.d = {1.0};
  functionals::Ledger ledger;
  ledger.n = 1;
  ledger.q = 4.0;
  double t = 1.0;
  while (t <= 200.0) {
    double amp = std::sqrt(t);  // growing integrand
    functionals::accumulate(ledger, t,
                            grid::sample(g, [&](const double* x) {
                              return amp * std::exp(-x[0] * x[0]);
                            }, t),
                            m);
    t *= 1.2;
  }
  CHECK_THROWS_WITH_AS(functionals::finalize_constants(ledger, m, 200.0),
                       doctest::Contains("non-decaying"), Error);
}

TEST_CASE("phi field: zero b, zero mass, parity") {
  Grid g(1, 40.0, 1024);
  model::ModelSpec m0 = critical_1d(false);
  functionals::Ledger ledger;
  ledger.n = 1;
  ledger.q = 3.0;
  Field u = grid::sample(g, [](const double* x) { return kernels::heat_g(x, 2.0, 1); }, 2.0);
  functionals::accumulate(ledger, 2.0, u, m0);
  Field phi0 = functionals::phi_field(2.0, u, ledger, m0);
  CHECK(grid::lp_norm(phi0, Norm::Linf) == 0.0);

  model::ModelSpec mb = critical_1d(true);
  functionals::Ledger lb;
  lb.n = 1;
  lb.q = 3.0;
  functionals::accumulate(lb, 2.0, u, mb);
  Field phi = functionals::phi_field(2.0, u, lb, mb);
  CHECK(std::abs(grid::moment0(phi)) <= 1e-8 * grid::lp_norm(phi, Norm::L1));
  // even u, even b: phi is odd
  const int n = g.points();
  for (int i = 0; i < n / 2; i += 37)
    CHECK(phi.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(-phi.values[static_cast<std::size_t>(n - 1 - i)]).epsilon(1e-10));

  CHECK_THROWS_WITH_AS(functionals::phi_field(3.0, u, lb, mb), doctest::Contains("ledger"),
                       Error);
}

TEST_CASE("phi_duhamel: zero integral and schedule guard") {
  auto res = tiny_run(true, 120.0, "tphi");
  REQUIRE(!res.ledger.phi_snapshots.empty());
  Field Phi = functionals::phi_duhamel(100.0, res.ledger);
  CHECK(std::abs(grid::moment0(Phi)) <= 1e-8);
  CHECK(grid::lp_norm(Phi, Norm::L1) > 0.0);

  // coarse snapshot schedule near the evaluation time trips the guard
  functionals::Ledger sparse;
  sparse.n = 1;
  sparse.q = 3.0;
  for (double t : {10.0, 25.0, 60.0, 120.0})
    sparse.phi_snapshots.emplace_back(t, res.ledger.phi_snapshots.front().second);
  CHECK_THROWS_WITH_AS(functionals::phi_duhamel(120.0, sparse), doctest::Contains("coarse"),
                       Error);
}

TEST_CASE("tail envelope integrals match numeric quadrature") {
  quad::QuadratureSpec qs;
  for (double T : {100.0, 1000.0}) {
    auto num = quad::integrate(
        [&](double u) {  // tau = T/u, u in (0,1]
          double tau = T / u;
          return std::pow(tau, -1.5) * std::log(2.0 + tau) * T / (u * u);
        },
        1e-8, 1.0, qs);
    CHECK(functionals::tail_integral_rho(T) == doctest::Approx(num.value).epsilon(1e-3));
  }
  CHECK(functionals::tail_integral_power(100.0, 1.5) ==
        doctest::Approx(2.0 / std::sqrt(100.0)).epsilon(1e-12));
}
