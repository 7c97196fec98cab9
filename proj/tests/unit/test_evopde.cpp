#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rsfbm/evopde.h"
#include "rsfbm/quadrature.h"
#include "rsfbm/specfun.h"

using namespace rsfbm;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("evopde") {
  TEST_CASE("gaussian maps to gaussian under the spectral transform") {
    const auto f = SpectralField::sample([](double x) { return std::exp(-0.5 * x * x); }, 1024, 20.0);
    double err = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double xi = f.xi(k);
      err = std::max(err, std::abs(f.fourier()[k] - std::complex<double>(std::exp(-0.5 * xi * xi), 0.0)));
    }
    CHECK(err < 1e-14);
    CHECK(max_abs_diff(spectral_inverse(f.fourier(), 20.0), f.values()) < 1e-14);
    CHECK(f.evaluate(0.3) == doctest::Approx(std::exp(-0.045)).epsilon(1e-13));
  }

  TEST_CASE("t = 0 returns the initial datum") {
    const auto u0 = InitialDatum::gaussian(2.0, 0.5);
    const auto u = fourier_solve(u0, HurstModel(0.7), Integrand::constant(1.0), DiffusionModel::gamma_grey(0.5), 0.0,
                                 {512, 20.0});
    for (std::size_t j = 0; j < u.size(); ++j) CHECK(u.values()[j] == u0.u0(u.x(j)));
  }

  TEST_CASE("heat equation: variances add") {
    const auto u0 = InitialDatum::gaussian(1.0, 0.8);
    const auto u = fourier_solve(u0, HurstModel(0.5), Integrand::constant(1.0), DiffusionModel::dirac(1.0), 1.5, {1024, 20.0});
    const double var = 0.8 + 1.5;
    double err = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
      err = std::max(err, std::abs(u.values()[j] - std::sqrt(0.8 / var) * std::exp(-u.x(j) * u.x(j) / (2 * var))));
    CHECK(err < 1e-13);
  }

  TEST_CASE("mass conservation and positivity") {
    const auto u0 = InitialDatum::gaussian(1.0, 1.0);
    for (const auto& m : {DiffusionModel::gamma_grey(0.5), DiffusionModel::mittag_leffler(0.5),
                          DiffusionModel::generalized_gamma(1.0, 1.2, 2.0)}) {
      const auto u = fourier_solve(u0, HurstModel(0.7), Integrand::constant(1.0), m, 1.0, {2048, 40.0});
      double mass = 0.0, lo = 0.0;
      for (double v : u.values()) {
        mass += v * u.dx();
        lo = std::min(lo, v);
      }
      CHECK(mass == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-6));
      CHECK(lo > -1e-10);
    }
  }

  TEST_CASE("time change: a power law integrand runs on the clock t^{1+beta/H}") {
    const double H = 0.75, beta = 0.5;
    const auto nu = Integrand::power_law(std::pow(power_law_constant(H, beta), -H), beta);
    const auto u0 = InitialDatum::gaussian(1.0, 1.0);
    const auto m = DiffusionModel::gamma_grey(0.4);
    const double t = 1.3;
    const auto a = fourier_solve(u0, HurstModel(H), nu, m, t, {512, 20.0});
    const auto b = fourier_solve(u0, HurstModel(H), Integrand::constant(1.0), m, std::pow(t, 1.0 + beta / H), {512, 20.0});
    CHECK(max_abs_diff(a.values(), b.values()) < 1e-10);
  }

  TEST_CASE("too coarse a grid is refused") {
    CHECK_THROWS(fourier_solve(InitialDatum::gaussian(1.0, 0.0001), HurstModel(0.5), Integrand::constant(1.0),
                               DiffusionModel::dirac(1.0), 1.0, {16, 20.0}));
  }

  TEST_CASE("Feynman-Kac against the spectral solution") {
    const auto u0 = InitialDatum::gaussian(1.0, 1.0);
    const HurstModel h(0.7);
    const auto m = DiffusionModel::generalized_gamma(1.0, 1.2, 2.0);
    const auto ref = fourier_solve(u0, h, Integrand::constant(1.0), m, 1.0);
    const auto mc = fk_solve(u0, h, Integrand::constant(1.0), m, 1.0, {-2.0, 0.0, 2.0}, 20000, 17, 1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(mc.value[i] - ref.evaluate(mc.x[i])) < 3.0 * mc.stderr_[i]);
    CHECK(fk_solve(u0, h, Integrand::constant(1.0), m, 1.0, {0.5}, 500, 3, 1).value ==
          fk_solve(u0, h, Integrand::constant(1.0), m, 1.0, {0.5}, 500, 3, 2).value);
    CHECK_THROWS_AS(fk_solve(u0, h, Integrand::constant(1.0), DiffusionModel::bender_butko(HomogeneousKernel::ggbm(1.4, 0.5)),
                             1.0, {0.0}, 10, 1),
                    UnsupportedError);
  }

  TEST_CASE("phi_k and the damped rho exponential") {
    const auto k = HomogeneousKernel::ggbm(1.0, 0.7);
    CHECK(phi_k(k, 3.0) == doctest::Approx(specfun::mittag_leffler(0.7, 1.0, -3.0)).epsilon(1e-10));
    CHECK_THROWS(phi_k(k, -1.0));
    CHECK(damped_rho_ml(0.5, 0.0) == doctest::Approx(1.0 / std::tgamma(0.5)).epsilon(1e-14));
    CHECK(damped_rho_ml(0.5, 2.0) == doctest::Approx(std::pow(2.0, 0.5) * specfun::scaled_rho_exponential(0.5, 2.0)).epsilon(1e-12));
  }

  TEST_CASE("kernel identity") {
    const HurstModel h(0.7);
    const auto grey = DiffusionModel::gamma_grey(0.5);
    for (double t : {0.5, 2.0})
      for (double xi : {0.5, 2.0}) CHECK(kernel_residual(KernelSpec::gamma_grey(0.5, 0.7), grey, h, t, xi) < 1e-6);
    const auto k = HomogeneousKernel::ggbm(1.4, 1.0);
    CHECK(kernel_residual(KernelSpec::bender_butko(k), DiffusionModel::bender_butko(k), h, 1.0, 1.0) < 1e-8);
    CHECK_THROWS_AS(kernel_residual(KernelSpec::gamma_grey(0.6, 0.7), grey, h, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(kernel_residual(KernelSpec::gamma_grey(0.5, 0.6), grey, h, 1.0, 1.0), PreconditionError);
  }

  TEST_CASE("kernel identity detects the wrong kernel") {
    // The gamma-grey kernel written out for rho = 0.6, tested against the rho = 0.5 law.
    const double H = 0.7, rho = 0.6;
    auto K = [H, rho](double t, double s, double xi) {
      const double d = std::pow(t, 2 * H) - std::pow(s, 2 * H);
      return -2 * H * std::pow(s, 2 * H - 1) * std::pow(xi, rho) * std::pow(d, rho - 1) * damped_rho_ml(rho, xi * d);
    };
    const HurstModel h(H);
    CHECK(kernel_residual(KernelSpec::explicit_kernel(K, H), DiffusionModel::gamma_grey(0.6), h, 1.0, 1.0) < 1e-6);
    CHECK(kernel_residual(KernelSpec::explicit_kernel(K, H), DiffusionModel::gamma_grey(0.5), h, 1.0, 1.0) > 1e-3);
  }

  TEST_CASE("evolution equation residual") {
    const auto u0 = InitialDatum::gaussian(1.0, 1.0);
    const HurstModel half(0.5);
    auto heat = [](double, double, double xi) { return -xi; };
    CHECK(pde_residual(u0, KernelSpec::explicit_kernel(heat, 0.5), DiffusionModel::dirac(1.0), half,
                       Integrand::constant(1.0), 1.0, {1024, 20.0}) < 1e-8);
    CHECK(pde_residual(u0, KernelSpec::gamma_grey(0.5, 0.7), DiffusionModel::gamma_grey(0.5), HurstModel(0.7),
                       Integrand::constant(1.0), 1.0, {1024, 20.0}, 64) < 1e-4);
  }

  TEST_CASE("superstatistical density") {
    CHECK(superstat_density(1.0, 1.2, 2.0, 1.4, 1.0, 0.7) == doctest::Approx(0.2773254622225214).epsilon(1e-10));
    for (double x : {0.0, 0.4, 2.5}) {
      CHECK(std::abs(superstat_density_mixture(0.8, 1.0, 2.0, 1.0, 2.0, x) -
                     superstat_density_closed(0.8, 1.0, 2.0, 1.0, 2.0, x)) < 1e-8);
      CHECK(superstat_density_closed(0.8, 1.0, 2.0, 1.0, 2.0, x) ==
            doctest::Approx(superstat_density_closed(0.8, 1.0, 2.0, 1.0, 2.0, -x)));
    }
    const double mass = 2.0 * quad::exp_map([](double x) { return superstat_density_closed(1.0, 1.2, 2.0, 1.4, 1.0, x); });
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("density shift identity") {
    CHECK(ek_identity_residual(1.0, 1.2, 2.0, 1.4, 1.0, 0.5) < 1e-8);
    CHECK_THROWS_WITH_AS(ek_identity_residual(1.0, 3.0, 2.0, 1.0, 1.0, 0.5), doctest::Contains("violated"),
                         PreconditionError);
  }

  TEST_CASE("multiplicative example") {
    const HurstModel h(0.6);
    const auto nu = Integrand::constant(1.0);
    const auto m = DiffusionModel::generalized_gamma(1.0, 1.2, 2.0);
    const MultiplicativeDatum linear{"y", [](double y) { return y; }, 1.0};
    // E[x e^{Z_t}] = x E[e^{A v(t)/2}]
    const double v = weighted_variance(h, nu, 0.8);
    const double mgf = quad::exp_map([&](double a) { return m.density(a) * std::exp(0.5 * a * v); });
    const auto o = multiplicative_oracle(linear, h, nu, m, 0.8, {0.5, 2.0});
    CHECK(o[0] == doctest::Approx(0.5 * mgf).epsilon(1e-9));
    CHECK(o[1] == doctest::Approx(2.0 * mgf).epsilon(1e-9));
    const MultiplicativeDatum bump{"e^{-y^2}", [](double y) { return std::exp(-y * y); }, 0.0};
    const auto ref = multiplicative_oracle(bump, h, nu, m, 1.0, {0.5, 1.0});
    const auto mc = multiplicative_fk(bump, h, nu, m, 1.0, {0.5, 1.0}, 20000, 23, 1);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(mc.value[i] - ref[i]) < 3.0 * mc.stderr_[i]);
    const auto t0 = multiplicative_oracle(bump, h, nu, m, 0.0, {0.5});
    CHECK(t0[0] == doctest::Approx(std::exp(-0.25)));
  }
}
