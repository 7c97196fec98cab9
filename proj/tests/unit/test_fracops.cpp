#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rsfbm/fracops.h"
#include "rsfbm/quadrature.h"

using namespace rsfbm;

TEST_SUITE("fracops") {
  TEST_CASE("hurst regimes and validation") {
    CHECK(HurstModel(0.3).regime() == Regime::sub);
    CHECK(HurstModel(0.5).regime() == Regime::classical);
    CHECK(HurstModel(0.7).regime() == Regime::super);
    CHECK_THROWS_AS(HurstModel(1.0), DomainError);
    CHECK_THROWS_AS(HurstModel(0.0), DomainError);
  }

  TEST_CASE("K_H matches the closed normalisation") {
    for (double H : {0.3, 0.5, 0.7, 0.9}) {
      const double ref = std::sqrt(2.0 * H * std::sin(std::numbers::pi * H) * std::tgamma(2.0 * H));
      CHECK(k_h(H) == doctest::Approx(ref).epsilon(1e-10));
    }
  }

  TEST_CASE("L2 norm of M_-^H applied to an indicator") {
    // Integrate (M_-^H 1_(s,t))^2 over the real line, split at the kinks.
    for (double H : {0.3, 0.7}) {
      const HurstModel h(H);
      const double s = 0.5, t = 1.5;
      auto sq = [&](double x) {
        const double m = m_minus_indicator(h, s, t, x);
        return m * m;
      };
      double total = quad::tanh_sinh(sq, s, t) + quad::exp_map([&](double y) { return sq(t + y); });
      total += quad::exp_map([&](double y) { return sq(s - y); });
      CHECK(std::sqrt(total) == doctest::Approx(std::pow(t - s, H)).epsilon(1e-7));
      CHECK(indicator_norm(h, s, t) == doctest::Approx(std::pow(t - s, H)).epsilon(1e-15));
    }
  }

  TEST_CASE("constant integrand scales the fbm variance") {
    const HurstModel h(0.3);
    const auto nu = Integrand::constant(2.0);
    CHECK(weighted_variance(h, nu, 1.7) == doctest::Approx(4.0 * std::pow(1.7, 0.6)).epsilon(1e-14));
    CHECK(cross_covariance(h, nu, 0.4, 1.1) ==
          doctest::Approx(2.0 * (std::pow(0.4, 0.6) + std::pow(1.1, 0.6) - std::pow(0.7, 0.6))).epsilon(1e-13));
    CHECK(std::isinf(variance_derivative(h, nu, 0.0)));
  }

  TEST_CASE("sub-diffusive regime needs a constant integrand") {
    const HurstModel h(0.3);
    CHECK_THROWS_WITH_AS(check_admissible(h, Integrand::power_law(1.0, 0.5)), doctest::Contains("constant"),
                         PreconditionError);
    CHECK_NOTHROW(check_admissible(HurstModel(0.7), Integrand::power_law(1.0, 0.5)));
  }

  TEST_CASE("power law variance against the nested reference route") {
    for (double H : {0.6, 0.75, 0.9}) {
      for (double beta : {0.0, 0.5, 1.0}) {
        const HurstModel h(H);
        const auto nu = Integrand::power_law(1.0, beta);
        const double ref = weighted_variance_numeric(H, [&](double s) { return nu(s); }, 1.3);
        CHECK(weighted_variance(h, nu, 1.3) == doctest::Approx(ref).epsilon(1e-8));
      }
    }
    // 2H(2H-1) int_0^1 s (1-s)^{2H-2} ds at H = 3/4
    const double b = std::tgamma(2.0) * std::tgamma(0.5) / std::tgamma(2.5);
    CHECK(variance_derivative(HurstModel(0.75), Integrand::power_law(1.0, 1.0), 1.0) ==
          doctest::Approx(1.5 * 0.5 * b).epsilon(1e-10));
  }

  TEST_CASE("power law normalisation gives a pure power time change") {
    CHECK(power_law_constant(0.7, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    const double H = 0.75, beta = 0.5;
    const double b = std::tgamma(1.5) * std::tgamma(0.5) / std::tgamma(2.0);
    CHECK(power_law_constant(H, beta) == doctest::Approx(std::pow(1.5 * 0.5 / 2.5 * b, 2.0 / 3.0)).epsilon(1e-12));
    const HurstModel h(H);
    const auto nu = Integrand::power_law(std::pow(power_law_constant(H, beta), -H), beta);
    for (double t : {0.3, 1.0, 2.5})
      CHECK(time_change(h, nu, t) == doctest::Approx(std::pow(t, 1.0 + beta / H)).epsilon(1e-10));
  }

  TEST_CASE("variance derivative agrees with a central difference") {
    const HurstModel h(0.8);
    const auto nu = Integrand::tabulated({0.0, 0.5, 1.0, 2.0}, {1.0, 1.5, 0.8, 0.8});
    const double t = 0.7, d = 1e-5;
    const double fd = (weighted_variance(h, nu, t + d) - weighted_variance(h, nu, t - d)) / (2 * d);
    CHECK(variance_derivative(h, nu, t) == doctest::Approx(fd).epsilon(1e-6));
  }

  TEST_CASE("inverse weighted variance round trip") {
    const HurstModel h(0.7);
    for (const auto& nu : {Integrand::constant(1.3), Integrand::power_law(0.8, 0.4),
                           Integrand::tabulated({0.0, 1.0, 2.0}, {0.5, 1.0, 2.0})}) {
      for (double t : {0.1, 0.9, 1.8}) {
        const double w = weighted_variance(h, nu, t);
        CHECK(inverse_weighted_variance(h, nu, 2.0, w) == doctest::Approx(t).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("tabulated constant integrand reproduces the constant one") {
    const HurstModel h(0.65);
    const auto flat = Integrand::tabulated({0.0, 1.0, 3.0}, {2.0, 2.0, 2.0});
    CHECK(weighted_variance(h, flat, 2.2) == doctest::Approx(weighted_variance(h, Integrand::constant(2.0), 2.2)).epsilon(1e-9));
    CHECK_THROWS(Integrand::tabulated({0.0, 1.0, 0.5}, {1.0, 1.0, 1.0}));
  }

  TEST_CASE("variance is nondecreasing in t") {
    const HurstModel h(0.7);
    const auto nu = Integrand::power_law(1.0, 0.5);
    double prev = 0.0;
    for (double t = 0.05; t < 3.0; t += 0.05) {
      const double v = weighted_variance(h, nu, t);
      CHECK(v >= prev);
      prev = v;
    }
  }
}
