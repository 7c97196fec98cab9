#include "rsfbm/randscale.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "rsfbm/quadrature.h"

namespace rsfbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// E[A^p e^{-xA}] for A = x0 G^{1/rho}, G ~ Gamma(nu/rho), as an integral over g.
double gg_weighted_laplace(double x0, double nu, double rho, double x, double p) {
  const double k = nu / rho;
  const double lg = std::lgamma(k);
  auto f = [&](double g) {
    const double a = x0 * std::pow(g, 1.0 / rho);
    const double lp = p == 0.0 ? 0.0 : p * std::log(a);
    return std::exp((k - 1.0) * std::log(g) - g - x * a + lp - lg);
  };
  return quad::exp_map(f, {1e-16, 1e-12});
}

}  // namespace

DiffusionModel DiffusionModel::dirac(double a0) {
  if (!(a0 > 0.0 && std::isfinite(a0))) throw PreconditionError("a0>0 required for Dirac coefficient");
  return DiffusionModel(Dirac{a0});
}

DiffusionModel DiffusionModel::mittag_leffler(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("beta in (0,1) required for Mittag-Leffler law");
  return DiffusionModel(MittagLefflerLaw{beta});
}

DiffusionModel DiffusionModel::gamma_grey(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw PreconditionError("rho in (0,1) required for gamma-grey law");
  return DiffusionModel(GammaGrey{rho});
}

DiffusionModel DiffusionModel::generalized_gamma(double x0, double nu, double rho) {
  if (!(x0 > 0.0)) throw PreconditionError("x0>0 required for generalized gamma");
  if (!(nu > 0.5)) throw PreconditionError("nu>1/2 required for generalized gamma");
  if (!(rho > 1.0)) throw PreconditionError("rho>1 required for generalized gamma");
  return DiffusionModel(GeneralizedGamma{x0, nu, rho});
}

DiffusionModel DiffusionModel::bender_butko(HomogeneousKernel kernel) {
  return DiffusionModel(BenderButko{std::move(kernel)});
}

std::string DiffusionModel::name() const {
  return std::visit(overloaded{[](const Dirac&) { return std::string("dirac"); },
                               [](const MittagLefflerLaw&) { return std::string("mittag_leffler"); },
                               [](const GammaGrey&) { return std::string("gamma_grey"); },
                               [](const GeneralizedGamma&) { return std::string("generalized_gamma"); },
                               [](const BenderButko&) { return std::string("bender_butko"); }},
                    v_);
}

std::string DiffusionModel::describe() const {
  std::ostringstream os;
  std::visit(overloaded{[&](const Dirac& m) { os << "dirac(a0=" << m.a0 << ")"; },
                        [&](const MittagLefflerLaw& m) { os << "mittag_leffler(beta=" << m.beta << ")"; },
                        [&](const GammaGrey& m) { os << "gamma_grey(rho=" << m.rho << ")"; },
                        [&](const GeneralizedGamma& m) {
                          os << "generalized_gamma(x0=" << m.x0 << ",nu=" << m.nu << ",rho=" << m.rho << ")";
                        },
                        [&](const BenderButko& m) { os << "bender_butko(" << m.kernel.describe() << ")"; }},
             v_);
  return os.str();
}

double DiffusionModel::radius() const {
  // Gamma(rho, x) carries an x^rho branch point at 0, so the transform is not
  // holomorphic at the origin.
  return std::holds_alternative<GammaGrey>(v_) ? 0.0 : kInf;
}

bool DiffusionModel::sampleable() const { return !std::holds_alternative<BenderButko>(v_); }

bool DiffusionModel::has_density() const {
  return std::holds_alternative<GammaGrey>(v_) || std::holds_alternative<GeneralizedGamma>(v_);
}

double DiffusionModel::support_lower() const {
  if (auto d = std::get_if<Dirac>(&v_)) return d->a0;
  return std::holds_alternative<GammaGrey>(v_) ? 1.0 : 0.0;
}

double DiffusionModel::laplace(double x) const { return laplace_derivative(x, 0); }

double DiffusionModel::laplace_derivative(double x, int order) const {
  if (order < 0) throw DomainError("Laplace derivative order must be >= 0");
  if (!std::isfinite(x)) throw DomainError("Laplace argument must be finite");
  const double R = radius();
  if (R == 0.0 ? x < 0.0 : !(x > -R))
    throw DomainError("Laplace argument " + std::to_string(x) + " outside the holomorphy region of " + describe());
  const double sgn = (order & 1) ? -1.0 : 1.0;
  return std::visit(
      overloaded{
          [&](const Dirac& m) { return sgn * std::pow(m.a0, order) * std::exp(-x * m.a0); },
          [&](const MittagLefflerLaw& m) {
            return sgn * specfun::mittag_leffler_derivative(m.beta, -x, order);
          },
          [&](const GammaGrey& m) {
            if (order == 0) return x == 0.0 ? 1.0 : boost::math::gamma_q(m.rho, x);
            if (x == 0.0) return sgn * kInf;
            // d^n/dx^n Q = -(1/Gamma(rho)) d^{n-1}/dx^{n-1} [x^{rho-1} e^{-x}]
            double sum = 0.0, falling = 1.0, binom = 1.0;
            const int m1 = order - 1;
            for (int j = 0; j <= m1; ++j) {
              if (j > 0) {
                falling *= (m.rho - j);
                binom = binom * (m1 - j + 1) / j;
              }
              const double e_sign = ((m1 - j) & 1) ? -1.0 : 1.0;
              sum += binom * falling * std::pow(x, m.rho - 1.0 - j) * e_sign;
            }
            return -sum * std::exp(-x) / std::tgamma(m.rho);
          },
          [&](const GeneralizedGamma& m) {
            if (order == 0) return generalized_gamma_laplace(m.x0, m.nu, m.rho, x);
            return sgn * gg_weighted_laplace(m.x0, m.nu, m.rho, x, order);
          },
          [&](const BenderButko& m) { return m.kernel.phi_derivative(x, order); }},
      v_);
}

double DiffusionModel::sample(Engine& rng) const {
  return std::visit(
      overloaded{[&](const Dirac& m) { return m.a0; },
                 [&](const MittagLefflerLaw& m) {
                   // Kanter's representation of S^{-beta}, S one-sided beta-stable.
                   std::uniform_real_distribution<double> unif(0.0, 1.0);
                   std::exponential_distribution<double> expo(1.0);
                   double u = 0.0;
                   while (u == 0.0) u = unif(rng);
                   const double U = std::numbers::pi * u;
                   const double E = expo(rng);
                   const double b = m.beta;
                   return std::pow(E, 1.0 - b) * std::sin(U) /
                          (std::pow(std::sin(b * U), b) * std::pow(std::sin((1.0 - b) * U), 1.0 - b));
                 },
                 [&](const GammaGrey& m) {
                   // A = 1/B, B ~ Beta(rho, 1-rho), written as 1 + Y/X to keep digits near A = 1.
                   std::gamma_distribution<double> gx(m.rho, 1.0), gy(1.0 - m.rho, 1.0);
                   const double X = gx(rng);
                   const double Y = gy(rng);
                   return 1.0 + Y / X;
                 },
                 [&](const GeneralizedGamma& m) {
                   std::gamma_distribution<double> g(m.nu / m.rho, 1.0);
                   return m.x0 * std::pow(g(rng), 1.0 / m.rho);
                 },
                 [&](const BenderButko&) -> double {
                   throw UnsupportedError("Bender-Butko law is implicit and cannot be sampled; use the Fourier solver");
                 }},
      v_);
}

double DiffusionModel::density(double a) const {
  if (auto g = std::get_if<GammaGrey>(&v_)) {
    if (a <= 1.0) return 0.0;
    return 1.0 / (std::tgamma(g->rho) * std::tgamma(1.0 - g->rho) * a * std::pow(a - 1.0, g->rho));
  }
  if (auto g = std::get_if<GeneralizedGamma>(&v_)) return generalized_gamma_density(g->x0, g->nu, g->rho, a);
  throw UnsupportedError("density is not available for " + describe());
}

double DiffusionModel::density_above_lower(double d) const {
  if (!(d > 0.0)) return 0.0;
  if (auto g = std::get_if<GammaGrey>(&v_))
    return 1.0 / (std::tgamma(g->rho) * std::tgamma(1.0 - g->rho) * (1.0 + d) * std::pow(d, g->rho));
  return density(support_lower() + d);
}

double DiffusionModel::moment(int n) const {
  if (n < 0) throw DomainError("moment order must be >= 0");
  if (n == 0) return 1.0;
  return std::visit(
      overloaded{[&](const Dirac& m) { return std::pow(m.a0, n); },
                 [&](const MittagLefflerLaw& m) { return std::tgamma(n + 1.0) / std::tgamma(1.0 + n * m.beta); },
                 // density ~ a^{-1-rho} at infinity: no moment of order >= rho exists
                 [&](const GammaGrey& m) { return n >= m.rho ? kInf : 0.0; },
                 [&](const GeneralizedGamma& m) {
                   return std::pow(m.x0, n) * std::exp(std::lgamma((m.nu + n) / m.rho) - std::lgamma(m.nu / m.rho));
                 },
                 [&](const BenderButko& m) {
                   return std::tgamma(n + 1.0) * m.kernel.coefficients(n + 1)[static_cast<std::size_t>(n)];
                 }},
      v_);
}

double moment_shift_factor(double x0, double nu, double rho) {
  if (!(x0 > 0.0 && nu > 0.0 && rho > 0.0)) throw DomainError("moment shift factor needs positive parameters");
  return x0 * std::exp(std::lgamma((nu + 1.0) / rho) - std::lgamma(nu / rho));
}

double generalized_gamma_density(double x0, double nu, double rho, double a) {
  if (!(x0 > 0.0 && nu > 0.0 && rho > 0.0)) throw DomainError("generalized gamma needs positive parameters");
  if (!(a > 0.0)) return 0.0;
  const double r = a / x0;
  return std::exp(std::log(rho) - nu * std::log(x0) - std::lgamma(nu / rho) + (nu - 1.0) * std::log(a) -
                  std::pow(r, rho));
}

double generalized_gamma_laplace(double x0, double nu, double rho, double x) {
  if (!(x0 > 0.0 && nu > 0.0 && rho > 0.0)) throw DomainError("generalized gamma needs positive parameters");
  if (x == 0.0) return 1.0;
  if (rho <= 1.0 && x < 0.0) throw DomainError("generalized gamma with rho <= 1 has no transform at x < 0");
  return gg_weighted_laplace(x0, nu, rho, x, 0.0);
}

int monotonicity_violations(const std::function<double(double)>& f, double x0, double h, int points, int max_order,
                            double slack) {
  std::vector<double> vals(static_cast<std::size_t>(points + max_order));
  double scale = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    vals[i] = f(x0 + h * static_cast<double>(i));
    scale = std::max(scale, std::abs(vals[i]));
  }
  int bad = 0;
  std::vector<double> d = vals;
  for (int n = 0; n <= max_order; ++n) {
    if (n > 0) {
      for (std::size_t i = 0; i + 1 < d.size(); ++i) d[i] = d[i + 1] - d[i];
      d.pop_back();
    }
    const double sign = (n & 1) ? -1.0 : 1.0;
    const double floor = slack * scale * std::pow(2.0, n);
    for (int i = 0; i < points; ++i)
      if (sign * d[static_cast<std::size_t>(i)] < -floor) ++bad;
  }
  return bad;
}

}  // namespace rsfbm
