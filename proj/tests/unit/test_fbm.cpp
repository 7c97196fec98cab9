#include <doctest.h>

#include <cmath>

#include "rsfbm/fbm.h"

using namespace rsfbm;

namespace {

// Empirical covariance of columns i, j with the standard error of the product mean.
std::pair<double, double> empirical_cov(const PathEnsemble& e, std::size_t i, std::size_t j) {
  double m = 0.0, s2 = 0.0;
  for (std::size_t p = 0; p < e.n_paths; ++p) m += e.at(p, i) * e.at(p, j);
  m /= e.n_paths;
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    const double d = e.at(p, i) * e.at(p, j) - m;
    s2 += d * d;
  }
  return {m, std::sqrt(s2 / (e.n_paths - 1.0) / e.n_paths)};
}

}  // namespace

TEST_SUITE("fbm") {
  TEST_CASE("time grids") {
    const auto g = TimeGrid::uniform(2.0, 4);
    CHECK(g.size() == 5);
    CHECK(g.is_uniform());
    CHECK(g.back() == 2.0);
    CHECK_FALSE(TimeGrid::from_points({0.0, 0.1, 0.5}).is_uniform());
    CHECK_THROWS(TimeGrid::from_points({0.0, 0.5, 0.5}));
    CHECK_THROWS(TimeGrid::from_points({0.1, 0.5}));
  }

  TEST_CASE("fbm covariance") {
    const HurstModel h(0.5);
    CHECK(fbm_covariance(h, 0.3, 0.8) == doctest::Approx(0.3));
    const auto C = z_covariance(HurstModel(0.7), Integrand::constant(1.0), TimeGrid::uniform(1.0, 4));
    for (int i = 0; i < 5; ++i) CHECK(C(i, i) == doctest::Approx(std::pow(i * 0.25, 1.4)).epsilon(1e-13));
  }

  TEST_CASE("jittered cholesky on a singular matrix") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 3);
    double jitter = -1.0;
    const auto L = jittered_cholesky(m, &jitter);
    CHECK(jitter > 0.0);
    CHECK((L * L.transpose() - m).norm() < 1e-6);
    Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(jittered_cholesky(bad), NumericalError);
  }

  TEST_CASE("sampled covariance matches the model for both methods") {
    for (FbmMethod method : {FbmMethod::cholesky, FbmMethod::circulant}) {
      for (double H : {0.3, 0.7}) {
        const HurstModel h(H);
        const auto g = TimeGrid::uniform(1.0, 128);
        FbmOptions o;
        o.method = method;
        o.threads = 1;
        const auto e = generate_fbm(h, g, 20000, 99, o);
        CHECK(e.method == method);
        for (std::size_t i = 0; i < e.n_paths; ++i) CHECK(e.at(i, 0) == 0.0);
        for (auto [i, j] : {std::pair<std::size_t, std::size_t>{128, 128}, {64, 128}, {1, 2}}) {
          const auto [c, se] = empirical_cov(e, i, j);
          CHECK(std::abs(c - fbm_covariance(h, g.points()[i], g.points()[j])) < 4.0 * se);
        }
      }
    }
  }

  TEST_CASE("same seed, any thread count, same paths") {
    const HurstModel h(0.6);
    const auto g = TimeGrid::uniform(1.0, 100);
    FbmOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto m = DiffusionModel::generalized_gamma(1.0, 1.2, 2.0);
    const auto a = generate_scaled(h, Integrand::constant(1.0), g, m, 500, 7, one);
    const auto b = generate_scaled(h, Integrand::constant(1.0), g, m, 500, 7, four);
    CHECK(a.paths == b.paths);
    CHECK(a.a_values == b.a_values);
    const auto c = generate_scaled(h, Integrand::constant(1.0), g, m, 500, 8, one);
    CHECK(a.paths != c.paths);
  }

  TEST_CASE("scaling keeps the gaussian component of every path") {
    const HurstModel h(0.7);
    const auto g = TimeGrid::from_points({0.0, 0.3, 0.9, 1.0});
    const auto nu = Integrand::power_law(1.0, 0.5);
    FbmOptions o;
    o.threads = 1;
    const auto y = generate_gaussian(h, nu, g, 200, 21, o);
    const auto z = generate_scaled(h, nu, g, DiffusionModel::gamma_grey(0.5), 200, 21, o);
    for (std::size_t p = 0; p < 200; ++p)
      for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(z.at(p, i) == doctest::Approx(std::sqrt(z.a_values[p]) * y.at(p, i)).epsilon(1e-12));
  }

  TEST_CASE("method names") {
    CHECK(fbm_method_from_string("circulant") == FbmMethod::circulant);
    CHECK(std::string(to_string(FbmMethod::cholesky)) == "cholesky");
    CHECK_THROWS(fbm_method_from_string("davies"));
  }
}
