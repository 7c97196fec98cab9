#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "rsfbm/specfun.h"

using namespace rsfbm;
using namespace rsfbm::specfun;

TEST_SUITE("specfun") {
  TEST_CASE("mittag-leffler closed forms") {
    CHECK(mittag_leffler(0.5, 1.0, -1.0) == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-13));
    CHECK(mittag_leffler(0.5, 1.0, -10.0) == doctest::Approx(std::exp(100.0) * std::erfc(10.0)).epsilon(1e-10));
    CHECK(mittag_leffler(1.0, 1.0, 2.5) == doctest::Approx(std::exp(2.5)).epsilon(1e-13));
    CHECK(mittag_leffler(1.0, 2.0, -3.0) == doctest::Approx((std::exp(-3.0) - 1.0) / -3.0).epsilon(1e-13));
    for (double a : {0.2, 0.5, 0.9}) CHECK(mittag_leffler(a, 1.0, 0.0) == 1.0);
  }

  TEST_CASE("series and integral branches meet at the switch radius") {
    for (double a : {0.3, 0.5, 0.8}) {
      const double r = series_radius(a);
      for (double z : {-r, r}) {
        const double s = mittag_leffler_series(a, 1.0, z);
        const double i = mittag_leffler_integral(a, 1.0, z);
        CHECK(std::abs(s - i) <= 1e-10 * std::max(1.0, std::abs(s)));
      }
    }
  }

  TEST_CASE("derivatives of E_alpha") {
    CHECK(mittag_leffler_derivative(1.0, -0.7, 2) == doctest::Approx(std::exp(-0.7)).epsilon(1e-12));
    const double h = 1e-4, z = -2.0;
    const double fd = (mittag_leffler(0.6, 1.0, z + h) - mittag_leffler(0.6, 1.0, z - h)) / (2 * h);
    CHECK(mittag_leffler_derivative(0.6, z, 1) == doctest::Approx(fd).epsilon(1e-7));
  }

  TEST_CASE("rho-exponential against the rho = 1/2 closed form") {
    // E_{1/2,1/2}(y) = 1/sqrt(pi) + y e^{y^2} erfc(-y)
    for (double z : {0.3, 1.0, 4.0}) {
      const double y = std::sqrt(z);
      const double ml = 1.0 / std::sqrt(std::numbers::pi) + y * std::exp(y * y) * std::erfc(-y);
      CHECK(rho_exponential(0.5, z) == doctest::Approx(ml / y).epsilon(1e-11));
      CHECK(scaled_rho_exponential(0.5, z) == doctest::Approx(std::exp(-z) * ml / y).epsilon(1e-11));
    }
    CHECK(scaled_rho_exponential(0.5, 400.0) == doctest::Approx(2.0).epsilon(1e-3));
  }

  TEST_CASE("upper incomplete gamma") {
    CHECK(upper_incomplete_gamma(0.5, 2.0) ==
          doctest::Approx(std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(2.0))).epsilon(1e-14));
    CHECK(upper_incomplete_gamma(0.5, 0.0) == doctest::Approx(std::sqrt(std::numbers::pi)));
    CHECK_THROWS_AS(upper_incomplete_gamma(-1.0, 1.0), DomainError);
  }

  TEST_CASE("kraetzel with rho = 1 is a Bessel function") {
    // Z^nu_1(u) = 2 u^{nu/2} K_nu(2 sqrt(u))
    for (double nu : {0.5, 1.3}) {
      for (double u : {0.2, 1.0, 3.0}) {
        const double ref = 2.0 * std::pow(u, nu / 2) * boost::math::cyl_bessel_k(nu, 2.0 * std::sqrt(u));
        CHECK(kraetzel(nu, 1.0, u) == doctest::Approx(ref).epsilon(1e-10));
      }
    }
    CHECK(kraetzel(0.7, 2.0, 0.0) == doctest::Approx(std::tgamma(0.35) / 2.0).epsilon(1e-11));
  }

  TEST_CASE("mellin transform of the exponential is the gamma function") {
    for (double s : {0.5, 1.0, 2.7})
      CHECK(mellin_quadrature([](double t) { return std::exp(-t); }, s) == doctest::Approx(std::tgamma(s)).epsilon(1e-10));
    CHECK_THROWS_AS(mellin_quadrature([](double t) { return std::exp(-t); }, -0.5), DomainError);
  }

  TEST_CASE("tolerance validation") {
    Tolerance t;
    t.max_terms = 4;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = Tolerance{};
    t.rel_tol = 0.0;
    CHECK_THROWS_AS(mittag_leffler(0.5, 1.0, -1.0, t), std::invalid_argument);
  }
}
