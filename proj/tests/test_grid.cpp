#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cdlab/grid.hpp"
#include "cdlab/kernels.hpp"

using namespace cdlab;
using grid::Field;
using grid::Grid;
using grid::Norm;

namespace {
Field gaussian_field(const Grid& g, double t, double shift = 0.0) {
  return grid::sample(g, [&](const double* x) {
    double xs = x[0] - shift;
    return kernels::heat_g(&xs, t, 1);
  });
}
}  // namespace

TEST_CASE("grid invariants: spacing and node symmetry") {
  Grid g(1, 40.0, 4096);
  CHECK(g.spacing() * g.points() == 2.0 * g.half_width());
  for (int i = 0; i < g.points() / 2; ++i)
    CHECK(g.coord(g.points() - 1 - i) == -g.coord(i));
  CHECK_THROWS_AS(Grid(1, 40.0, 15), Error);
  CHECK_THROWS_AS(Grid(3, 40.0, 64), Error);
}

TEST_CASE("lp_norm on the zero field and the heat kernel") {
  Grid g(1, 40.0, 4096);
  Field zero(g);
  CHECK(grid::lp_norm(zero, Norm::L1) == 0.0);
  CHECK(grid::lp_norm(zero, Norm::Linf) == 0.0);

  Field f = gaussian_field(g, 1.0);
  CHECK(grid::lp_norm(f, Norm::L1) == doctest::Approx(1.0).epsilon(1e-8));
  // max over cell centers sits half a spacing off the peak
  CHECK(grid::lp_norm(f, Norm::Linf) ==
        doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-5));
}

TEST_CASE("lp_norm rejects corrupt fields") {
  Grid g(1, 10.0, 16);
  Field f(g);
  f.values[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(grid::lp_norm(f, Norm::L1), doctest::Contains("non-finite"), Error);
}

TEST_CASE("moments of even, shifted and dipole samples") {
  Grid g(1, 40.0, 4096);
  Field f = gaussian_field(g, 1.0);
  CHECK(grid::moment0(f) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(grid::moment1(f)[0]) <= 1e-10);

  Field shifted = gaussian_field(g, 1.0, 1.0);
  CHECK(grid::moment1(shifted)[0] == doctest::Approx(1.0).epsilon(1e-6));

  Field dipole = grid::sample(g, [](const double* x) {
    double gv[1];
    kernels::grad_heat_g(x, 1.0, 1, gv);
    return gv[0];
  });
  CHECK(std::abs(grid::moment0(dipole)) <= 1e-10);
}

TEST_CASE("moment0 of an odd field vanishes to rounding") {
  Grid g(1, 20.0, 512);
  Field f = grid::sample(g, [](const double* x) { return x[0] * std::exp(-x[0] * x[0] / 3.0); });
  CHECK(std::abs(grid::moment0(f)) <= 1e-15);
}

TEST_CASE("triangle inequality holds on sampled fields") {
  Grid g(1, 10.0, 128);
  std::mt19937 rng(12345);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    Field a(g), b(g), sum(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      a.values[k] = dist(rng);
      b.values[k] = dist(rng);
      sum.values[k] = a.values[k] + b.values[k];
    }
    for (Norm p : {Norm::L1, Norm::L2, Norm::Linf})
      CHECK(grid::lp_norm(sum, p) <= grid::lp_norm(a, p) + grid::lp_norm(b, p) + 1e-12);
  }
}

TEST_CASE("refinement convergence of the discrete L1 norm is O(h^2)") {
  // x e^{-x^2/2} has |.| L1 norm exactly 2 and a kink at the origin, so the
  // midpoint rule converges at second order rather than faster.
  auto err_at = [](int npts) {
    Grid g(1, 12.0, npts);
    Field f = grid::sample(g, [](const double* x) { return x[0] * std::exp(-x[0] * x[0] / 2.0); });
    return std::abs(grid::lp_norm(f, Norm::L1) - 2.0);
  };
  double e1 = err_at(128);
  double e2 = err_at(256);
  double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
  CHECK(order <= 2.6);
}

TEST_CASE("resample: identity, refinement accuracy, zero field, errors") {
  Grid coarse(1, 40.0, 2048);
  Grid fine(1, 40.0, 4096);
  Field f = gaussian_field(coarse, 1.0);

  auto ident = grid::resample(f, coarse);
  for (std::size_t k = 0; k < f.values.size(); ++k)
    CHECK(ident.field.values[k] == doctest::Approx(f.values[k]).epsilon(1e-13));

  auto up = grid::resample(f, fine);
  double worst = 0.0;
  for (int i = 0; i < fine.points(); ++i) {
    double x[1] = {fine.coord(i)};
    worst = std::max(worst, std::abs(up.field.values[static_cast<std::size_t>(i)] -
                                     kernels::heat_g(x, 1.0, 1)));
  }
  CHECK(worst <= 1e-6);
  CHECK(up.mass_delta <= 1e-8);

  Field zero(coarse);
  auto z = grid::resample(zero, fine);
  CHECK(grid::lp_norm(z.field, Norm::Linf) == 0.0);

  Grid toocoarse(1, 40.0, 512);
  CHECK_THROWS_WITH_AS(grid::resample(f, toocoarse), doctest::Contains("coarser"), Error);
  Grid smaller(1, 20.0, 2048);
  CHECK_THROWS_AS(grid::resample(f, smaller), Error);
}

TEST_CASE("resample in two dimensions keeps the analytic kernel") {
  Grid coarse(2, 12.0, 96);
  Grid fine(2, 12.0, 128);
  Field f = grid::sample(coarse, [](const double* x) { return kernels::heat_g(x, 1.0, 2); });
  auto up = grid::resample(f, fine);
  double worst = 0.0;
  for (int j = 0; j < fine.points(); ++j)
    for (int i = 0; i < fine.points(); ++i) {
      double x[2] = {fine.coord(i), fine.coord(j)};
      worst = std::max(worst,
                       std::abs(up.field.values[static_cast<std::size_t>(i) +
                                                static_cast<std::size_t>(fine.points()) * j] -
                                kernels::heat_g(x, 1.0, 2)));
    }
  CHECK(worst <= 5e-5);
}
