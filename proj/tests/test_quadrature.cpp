#include <doctest.h>

#include <cmath>

#include "cdlab/quadrature.hpp"

using namespace cdlab;
using quad::EndpointRule;
using quad::QuadratureSpec;

TEST_CASE("polynomials are exact") {
  auto r = quad::integrate([](double x) { return x * x * x - 2.0 * x + 1.0; }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("gaussian integral to tight tolerance") {
  QuadratureSpec qs;
  qs.rel_tol = 1e-12;
  auto r = quad::integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0, qs);
  CHECK(r.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
  CHECK(r.error_estimate <= 1e-12 * std::sqrt(M_PI) * 10.0);
}

TEST_CASE("sqrt endpoint substitutions remove integrable singularities") {
  QuadratureSpec qs;
  qs.endpoint = EndpointRule::SqrtLower;
  auto r = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, qs);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));

  qs.endpoint = EndpointRule::SqrtUpper;
  auto r2 = quad::integrate([](double x) { return 1.0 / std::sqrt(1.0 - x); }, 0.0, 1.0, qs);
  CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("non-convergence reports the achieved estimate") {
  QuadratureSpec qs;
  qs.max_subdivisions = 4;
  qs.rel_tol = 1e-14;
  qs.abs_tol = 1e-16;
  CHECK_THROWS_WITH_AS(
      quad::integrate([](double x) { return std::pow(x, -0.9); }, 1e-12, 1.0, qs),
      doctest::Contains("achieved error estimate"), Error);
}

TEST_CASE("tolerances must be positive") {
  QuadratureSpec qs;
  qs.rel_tol = 0.0;
  CHECK_THROWS_AS(quad::integrate([](double x) { return x; }, 0.0, 1.0, qs), Error);
}

TEST_CASE("empty interval integrates to zero") {
  auto r = quad::integrate([](double x) { return x; }, 2.0, 2.0);
  CHECK(r.value == 0.0);
}
