#include <doctest.h>

#include <cmath>

#include "rsfbm/stochint.h"

using namespace rsfbm;

namespace {

double mean_at(const PathEnsemble& e, std::size_t i, double* se) {
  double m = 0.0, s2 = 0.0;
  for (std::size_t p = 0; p < e.n_paths; ++p) m += e.at(p, i);
  m /= e.n_paths;
  for (std::size_t p = 0; p < e.n_paths; ++p) s2 += (e.at(p, i) - m) * (e.at(p, i) - m);
  *se = std::sqrt(s2 / (e.n_paths - 1.0) / e.n_paths);
  return m;
}

}  // namespace

TEST_SUITE("stochint") {
  TEST_CASE("functional names") {
    CHECK(functional_from_name("z4").name == "z4");
    CHECK(functional_from_name("exp:0.5").F(0.0, 2.0, 1.0) == doctest::Approx(std::exp(1.0)));
    CHECK_THROWS_AS(functional_from_name("sin"), PreconditionError);
    CHECK_THROWS_AS(functional_power(3), DomainError);
  }

  TEST_CASE("closed-form gaussian means agree with gauss-hermite") {
    for (const char* name : {"z2", "z4", "cos", "exp:0.7"}) {
      const auto f = functional_from_name(name);
      ItoOptions with, without;
      auto g = f;
      g.mean_F = g.mean_dt = g.mean_dzz = {};
      const auto a = ito_expectation_quadrature(f, HurstModel(0.6), Integrand::constant(1.0),
                                                DiffusionModel::dirac(1.3), 1.0, with);
      const auto b = ito_expectation_quadrature(g, HurstModel(0.6), Integrand::constant(1.0),
                                                DiffusionModel::dirac(1.3), 1.0, without);
      CHECK(a.lhs == doctest::Approx(b.lhs).epsilon(1e-12));
      CHECK(a.variance_term == doctest::Approx(b.variance_term).epsilon(1e-12));
    }
  }

  TEST_CASE("fourth moment algebra under a Dirac law") {
    // E[Z_T^4] = 3 v(T)^2 and the correction term gives the same.
    for (double H : {0.3, 0.5, 0.7}) {
      const auto q = ito_expectation_quadrature(functional_power(4), HurstModel(H), Integrand::constant(1.0),
                                                DiffusionModel::dirac(1.0), 1.0);
      CHECK(q.lhs == doctest::Approx(3.0).epsilon(1e-13));
      CHECK(std::abs(q.residual) < 1e-8);
    }
  }

  TEST_CASE("quadrature oracle over laws with a density") {
    const auto gg = DiffusionModel::generalized_gamma(1.0, 1.2, 2.0);
    CHECK(std::abs(ito_expectation_residual_quadrature(functional_cos(), HurstModel(0.6), Integrand::constant(1.0), gg,
                                                       1.0)) < 1e-6);
    CHECK(std::abs(ito_expectation_residual_quadrature(functional_power(2), HurstModel(0.8),
                                                       Integrand::power_law(1.0, 0.5), gg, 1.5)) < 1e-6);
    ItoOptions o;
    o.enforce_admissibility = false;
    const auto grey = DiffusionModel::gamma_grey(0.5);
    CHECK(std::abs(ito_expectation_residual_quadrature(functional_cos(), HurstModel(0.7), Integrand::constant(1.0), grey,
                                                       1.0, o)) < 1e-6);
  }

  TEST_CASE("infinite expectations are reported, not integrated") {
    ItoOptions o;
    o.enforce_admissibility = false;
    CHECK_THROWS_AS(ito_expectation_quadrature(functional_power(2), HurstModel(0.7), Integrand::constant(1.0),
                                               DiffusionModel::gamma_grey(0.5), 1.0, o),
                    EvaluationError);
    CHECK_THROWS_AS(ito_expectation_quadrature(functional_cos(), HurstModel(0.7), Integrand::constant(1.0),
                                               DiffusionModel::mittag_leffler(0.5), 1.0),
                    UnsupportedError);
  }

  TEST_CASE("admissibility") {
    const HurstModel h(0.7);
    const auto nu = Integrand::constant(1.0);
    const auto grey = check_admissibility(functional_power(2), h, nu, DiffusionModel::gamma_grey(0.5), 1.0);
    CHECK_FALSE(grey.ok);
    CHECK(grey.violated.find("R_A") != std::string::npos);
    CHECK(check_admissibility(functional_exp(3.0), h, nu, DiffusionModel::generalized_gamma(1.0, 1.2, 2.0), 1.0).ok);
    CHECK_THROWS_AS(ito_expectation_residual_mc(functional_cos(), h, nu, DiffusionModel::gamma_grey(0.5), 1.0, 100, 1),
                    PreconditionError);
    CHECK(exponential_growth_bound(2.0, 0.5, 4.0, 1.0) == doctest::Approx(0.5));
    CHECK(std::isinf(exponential_growth_bound(2.0, 0.5, 4.0, 0.0)));
  }

  TEST_CASE("Monte Carlo residual within 3 standard errors") {
    ItoOptions o;
    o.threads = 1;
    for (const char* name : {"z2", "cos"}) {
      const auto r = ito_expectation_residual_mc(functional_from_name(name), HurstModel(0.7), Integrand::constant(1.0),
                                                 DiffusionModel::dirac(1.0), 1.0, 20000, 5, o);
      CHECK(r.mc_stderr > 0.0);
      CHECK(std::abs(r.residual) < 3.0 * r.mc_stderr);
    }
  }

  TEST_CASE("Monte Carlo residual is thread-count independent") {
    ItoOptions one, three;
    one.threads = 1;
    three.threads = 3;
    const auto m = DiffusionModel::generalized_gamma(1.0, 1.2, 2.0);
    const auto a = ito_expectation_residual_mc(functional_cos(), HurstModel(0.4), Integrand::constant(1.0), m, 1.0, 3000, 9, one);
    const auto b = ito_expectation_residual_mc(functional_cos(), HurstModel(0.4), Integrand::constant(1.0), m, 1.0, 3000, 9, three);
    CHECK(a.residual == b.residual);
    CHECK(a.mc_stderr == b.mc_stderr);
  }

  TEST_CASE("quadratic integral identity") {
    const auto d = quadratic_identity_moments(HurstModel(0.5), DiffusionModel::dirac(1.0), 1.0, 40000, 3, 1);
    CHECK(std::abs(d.mean) < 3.0 * d.mean_se);
    CHECK(d.expected_second == doctest::Approx(0.5));
    CHECK(std::abs(d.second - 0.5) < 4.0 * d.second_se);
    const auto g = quadratic_identity_moments(HurstModel(0.7), DiffusionModel::gamma_grey(0.5), 1.0, 2000, 3, 1);
    CHECK_FALSE(g.second_checked);
  }

  TEST_CASE("geometric process normalisation") {
    const auto grid = TimeGrid::uniform(1.0, 8);
    FbmOptions o;
    o.threads = 1;
    auto zero = [](double) { return 0.0; };
    const auto e = geometric_rsgp(2.0, zero, zero, Integrand::constant(1.0), HurstModel(0.7), DiffusionModel::dirac(1.0),
                                  grid, 20000, 13, ExponentConvention::plain, o);
    for (std::size_t p = 0; p < e.n_paths; ++p) CHECK(e.at(p, 0) == 2.0);
    double se = 0.0;
    const double m0 = mean_at(e, 8, &se);
    CHECK(std::abs(m0 - 2.0) < 4.0 * se);
    const auto f = geometric_rsgp(1.0, [](double) { return 0.5; }, [](double) { return 1.0; }, Integrand::constant(1.0),
                                  HurstModel(0.7), DiffusionModel::dirac(1.0), grid, 20000, 14, ExponentConvention::plain, o);
    const double m1 = mean_at(f, 8, &se);
    CHECK(std::abs(m1 - std::exp(0.5)) < 3.0 * se);
    CHECK_THROWS_AS(geometric_rsgp(1.0, [](double a) { return 2.0 * std::sqrt(a); }, zero, Integrand::constant(1.0), HurstModel(0.7),
                                   DiffusionModel::dirac(1.0), grid, 10, 1, ExponentConvention::plain, o),
                    PreconditionError);
  }
}
