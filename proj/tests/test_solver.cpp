#include <doctest.h>

#include <cmath>

#include "cdlab/grid.hpp"
#include "cdlab/kernels.hpp"
#include "cdlab/model.hpp"
#include "cdlab/solver.hpp"

using namespace cdlab;
using grid::Field;
using grid::Grid;
using grid::Norm;

namespace {

model::ModelSpec heat_model_1d() {
  model::ModelSpec m;
  m.n = 1;
  m.q = 3.0;
  m.d = {0.0};
  return m;
}

}  // namespace

TEST_CASE("model validation messages") {
  model::ModelSpec m = heat_model_1d();
  m.q = 1.0;
  CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("q must exceed 1 + 1/n"), Error);
  m.q = 3.0;
  m.b.kind = model::BKind::PowerDecay;
  m.b.amplitude = 1.5;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("power-decay b satisfies the decay condition with C = |b0|(1+delta)") {
  model::BSpec b;
  b.kind = model::BKind::PowerDecay;
  b.amplitude = 0.3;
  b.delta = 2.0;
  double C = std::abs(b.amplitude) * (1.0 + b.delta);
  for (double x = -30.0; x <= 30.0; x += 0.37) {
    double xv[1] = {x};
    double db[1];
    b.grad(xv, 1, db);
    double lhs = std::abs(b.value(xv, 1)) + std::sqrt(1.0 + x * x) * std::abs(db[0]);
    CHECK(lhs <= C * std::pow(1.0 + x * x, -b.delta / 2.0) * (1.0 + 1e-12));
  }
}

TEST_CASE("dipole data integrates to zero and is a derivative") {
  model::ModelSpec m = heat_model_1d();
  m.u0.kind = model::U0Kind::Dipole;
  m.u0.dipole_scale = 1.0;
  m.u0.dipole_width = 1.0;
  Grid g(1, 40.0, 2048);
  Field u0 = solver::initial_field(m, g);
  CHECK(std::abs(grid::moment0(u0)) <= 1e-10);
  CHECK(grid::moment1(u0)[0] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("discrete_rhs: constants, heat-kernel time derivative, parity") {
  Grid g(1, 30.0, 1024);
  model::ModelSpec m = heat_model_1d();

  Field c(g, 1.0);
  auto parts = solver::discrete_rhs(c, m);
  for (int i = 2; i < g.points() - 2; ++i)
    CHECK(std::abs(parts.diffusion.values[static_cast<std::size_t>(i)]) <= 1e-12);

  // u = G(.,1): diffusion approximates dtG at O(h^2)
  auto rhs_err = [&](int npts) {
    Grid gg(1, 30.0, npts);
    Field u = grid::sample(gg, [](const double* x) { return kernels::heat_g(x, 1.0, 1); });
    auto p = solver::discrete_rhs(u, m);
    double worst = 0.0;
    for (int i = 0; i < gg.points(); ++i) {
      double x = gg.coord(i);
      double dtg = kernels::heat_g(&x, 1.0, 1) * (x * x / 4.0 - 0.5);
      worst = std::max(worst, std::abs(p.diffusion.values[static_cast<std::size_t>(i)] - dtg));
    }
    return worst;
  };
  double e1 = rhs_err(1024);
  double e2 = rhs_err(2048);
  CHECK(std::log2(e1 / e2) >= 1.8);

  // odd u with q = 3 drift: convection is even with zero grid sum
  model::ModelSpec md = heat_model_1d();
  md.d = {1.0};
  Field odd = grid::sample(g, [](const double* x) { return x[0] * std::exp(-x[0] * x[0]); });
  auto pd = solver::discrete_rhs(odd, md);
  const int n = g.points();
  for (int i = 1; i < n / 2; ++i)
    CHECK(pd.convection.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(pd.convection.values[static_cast<std::size_t>(n - 1 - i)])
              .epsilon(1e-12));
  grid::CompensatedSum s;
  for (double v : pd.convection.values) s.add(v);
  CHECK(std::abs(s.value()) <= 1e-13);
}

TEST_CASE("gradient_field: constants, analytic kernel, parity") {
  Grid g(1, 30.0, 1024);
  Field c(g, 2.5);
  auto gc = solver::gradient_field(c);
  CHECK(grid::lp_norm(gc[0], Norm::Linf) <= 1e-12);

  Field u = grid::sample(g, [](const double* x) { return kernels::heat_g(x, 1.0, 1); });
  auto gu = solver::gradient_field(u);
  double worst = 0.0;
  for (int i = 0; i < g.points(); ++i) {
    double gv[1];
    double x[1] = {g.coord(i)};
    kernels::grad_heat_g(x, 1.0, 1, gv);
    worst = std::max(worst, std::abs(gu[0].values[static_cast<std::size_t>(i)] - gv[0]));
  }
  CHECK(worst <= 1e-3 * grid::lp_norm(u, Norm::Linf));

  Field odd = grid::sample(g, [](const double* x) { return x[0] * std::exp(-x[0] * x[0]); });
  auto go = solver::gradient_field(odd);
  const int n = g.points();
  for (int i = 0; i < n / 2; ++i)
    CHECK(go[0].values[static_cast<std::size_t>(i)] ==
          doctest::Approx(go[0].values[static_cast<std::size_t>(n - 1 - i)]).epsilon(1e-12));
}

TEST_CASE("initial data that spills out of the box is rejected") {
  model::ModelSpec m = heat_model_1d();
  m.u0.width = 4.0;
  Grid tiny(1, 6.0, 64);
  CHECK_THROWS_WITH_AS(solver::initial_field(m, tiny), doctest::Contains("half_width"), Error);
}

TEST_CASE("heat oracle: solve matches the exact kernel evolution") {
  model::ModelSpec m = heat_model_1d();
  Grid g(1, 30.0, 1024);
  solver::SolverConfig cfg(g);
  cfg.t_final = 1.0;
  cfg.dt_init = 1e-3;
  double err = -1.0;
  solver::StepHooks hooks;
  cfg.forced_times = {1.0};
  hooks.on_forced_time = [&](double t, const Field& u) {
    if (t == 0.0) return;
    double worst = 0.0;
    for (int i = 0; i < g.points(); ++i) {
      double x[1] = {g.coord(i)};
      worst = std::max(worst, std::abs(u.values[static_cast<std::size_t>(i)] -
                                       kernels::heat_g(x, 1.0 + t, 1)));
    }
    err = worst;
  };
  auto diag = solver::solve(m, cfg, hooks);
  CHECK(err >= 0.0);
  CHECK(err <= 5e-5);
  CHECK(diag.mass_drift <= 1e-9);
}

TEST_CASE("simultaneous space-time refinement converges at order >= 1.8") {
  auto err_at = [](int npts, double dtf) {
    model::ModelSpec m = heat_model_1d();
    m.u0.width = 0.25;  // sharper data so the spatial error is visible
    Grid g(1, 24.0, npts);
    solver::SolverConfig cfg(g);
    cfg.t_final = 1.0;
    cfg.dt_init = 1e-3 * dtf;
    cfg.dt_rel_cap = 0.05 * dtf;
    cfg.forced_times = {1.0};
    double err = 0.0;
    solver::StepHooks hooks;
    hooks.on_forced_time = [&](double t, const Field& u) {
      if (t == 0.0) return;
      for (int i = 0; i < g.points(); ++i) {
        double x[1] = {g.coord(i)};
        err = std::max(err, std::abs(u.values[static_cast<std::size_t>(i)] -
                                     kernels::heat_g(x, 0.25 + t, 1)));
      }
    };
    solver::solve(m, cfg, hooks);
    return err;
  };
  double e1 = err_at(256, 1.0);
  double e2 = err_at(512, 0.25);  // h/2, dt/4 keeps both error terms shrinking 4x
  CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("two-dimensional heat oracle via ADI") {
  model::ModelSpec m;
  m.n = 2;
  m.q = 2.0;
  m.d = {0.0, 0.0};
  Grid g(2, 16.0, 128);
  solver::SolverConfig cfg(g);
  cfg.t_final = 0.5;
  cfg.dt_init = 5e-4;
  cfg.forced_times = {0.5};
  double err = -1.0;
  solver::StepHooks hooks;
  hooks.on_forced_time = [&](double t, const Field& u) {
    if (t == 0.0) return;
    double worst = 0.0;
    for (int j = 0; j < g.points(); ++j)
      for (int i = 0; i < g.points(); ++i) {
        double x[2] = {g.coord(i), g.coord(j)};
        worst = std::max(worst, std::abs(u.values[static_cast<std::size_t>(i) +
                                                  static_cast<std::size_t>(g.points()) * j] -
                                         kernels::heat_g(x, 1.0 + t, 2)));
      }
    err = worst;
  };
  auto diag = solver::solve(m, cfg, hooks);
  CHECK(err >= 0.0);
  CHECK(err <= 2e-4);
  CHECK(diag.mass_drift <= 1e-9);
}

TEST_CASE("constant b rescales time for pure diffusion") {
  // a = 1 + c with d = 0: u_{1+c}(t) = u_1((1+c) t)
  const double c = 0.5;
  Grid g(1, 24.0, 512);

  auto run = [&](double bconst, double tf) {
    model::ModelSpec m = heat_model_1d();
    m.u0.width = 0.5;
    if (bconst != 0.0) {
      m.b.kind = model::BKind::Constant;
      m.b.amplitude = bconst;
    }
    solver::SolverConfig cfg(g);
    cfg.t_final = tf;
    cfg.dt_init = 2e-4;
    cfg.dt_rel_cap = 0.005;
    cfg.forced_times = {tf};
    Field out(g);
    solver::StepHooks hooks;
    hooks.on_forced_time = [&](double t, const Field& u) {
      if (t > 0.0) out = u;
    };
    solver::solve(m, cfg, hooks);
    return out;
  };

  Field a = run(c, 2.0);
  Field b = run(0.0, (1.0 + c) * 2.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    worst = std::max(worst, std::abs(a.values[k] - b.values[k]));
  CHECK(worst <= 5e-5);
}

TEST_CASE("decay bound: sup-norm of a critical run stays on the t^{-1/2} envelope") {
  model::ModelSpec m;
  m.n = 1;
  m.q = 3.0;
  m.d = {1.0};
  Grid g(1, 80.0, 1024);
  solver::SolverConfig cfg(g);
  cfg.t_final = 50.0;
  cfg.dt_init = 1e-3;
  cfg.forced_times = {1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  solver::StepHooks hooks;
  hooks.on_forced_time = [&](double t, const Field& u) {
    if (t < 1.0) return;
    double v = grid::lp_norm(u, Norm::Linf) * std::sqrt(t);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  solver::solve(m, cfg, hooks);
  CHECK(hi / lo <= 1.6);
}

TEST_CASE("a convection blow-up is reported as instability") {
  model::ModelSpec m;
  m.n = 1;
  m.q = 3.0;
  m.d = {10.0};
  m.u0.mass = 5.0;
  m.u0.width = 0.25;
  Grid g(1, 20.0, 256);
  solver::SolverConfig cfg(g);
  cfg.t_final = 10.0;
  cfg.dt_init = 2.0;      // far beyond the CFL bound
  cfg.cfl = 1e9;          // disable the guard
  cfg.dt_rel_cap = 1e9;
  cfg.leak_tol_rel = 1e9;
  cfg.mass_tol_rel = 1e9;
  solver::StepHooks hooks;
  CHECK_THROWS_AS(solver::solve(m, cfg, hooks), Error);
}
