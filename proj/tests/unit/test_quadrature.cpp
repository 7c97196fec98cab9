#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rsfbm/quadrature.h"

using namespace rsfbm;

TEST_SUITE("quadrature") {
  TEST_CASE("gauss-legendre integrates degree 2n-1 exactly") {
    const auto r = quad::gauss_legendre(10, 0.0, 1.0);
    CHECK(r.apply([](double x) { return std::pow(x, 19); }) == doctest::Approx(1.0 / 20.0).epsilon(1e-14));
    double w = 0.0;
    for (double v : r.weights) w += v;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("gauss-jacobi on the unit interval carries the weight exactly") {
    // int_0^1 (1-u)^{-1/2} u^3 du = B(4, 1/2)
    const auto r = quad::gauss_jacobi_unit(16, -0.5, 0.0);
    const double beta = std::tgamma(4.0) * std::tgamma(0.5) / std::tgamma(4.5);
    CHECK(r.apply([](double u) { return u * u * u; }) == doctest::Approx(beta).epsilon(1e-14));
  }

  TEST_CASE("gauss-hermite reproduces normal moments") {
    const auto r = quad::gauss_hermite(40);
    CHECK(r.apply([](double x) { return x * x * x * x; }) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(r.apply([](double x) { return std::pow(x, 6); }) == doctest::Approx(15.0).epsilon(1e-13));
    CHECK(r.apply([](double x) { return std::cos(x); }) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  }

  TEST_CASE("tanh-sinh handles endpoint singularities") {
    CHECK(quad::tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-11));
    // The distance to b is passed separately, so (b-x)^{-0.9} keeps full accuracy.
    const double v = quad::tanh_sinh([](double, double, double r) { return std::pow(r, -0.9); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(quad::tanh_sinh([](double) { return 1.0; }, 0.0, 3.0) == doctest::Approx(3.0).epsilon(1e-14));
  }

  TEST_CASE("exp-map over the half line") {
    CHECK(quad::exp_map([](double x) { return std::exp(-x); }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(quad::exp_map([](double x) { return std::exp(-x) / std::sqrt(x); }) ==
          doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(quad::exp_map_from([](double x) { return 1.0 / (x * x); }, 1.0) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK_THROWS_AS(quad::exp_map([](double x) { return 1.0 / (1.0 + x); }), EvaluationError);
  }

  TEST_CASE("gauss-kronrod on a smooth integrand") {
    CHECK(quad::gauss_kronrod([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
          doctest::Approx(2.0).epsilon(1e-13));
  }
}
