#include "rsfbm/specfun.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace rsfbm::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_alpha_beta(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Mittag-Leffler: alpha must lie in (0,1]");
  if (!(beta > 0.0)) throw DomainError("Mittag-Leffler: beta must be > 0");
}

// Trapezoid tolerances are tightened because successive halvings of a
// doubly-exponential integrand overestimate the error by orders of magnitude.
quad::Tolerances inner(const Tolerance& tol) { return {tol.abs_tol * 1e-3, tol.rel_tol * 1e-3}; }

// sum_{k>=k0} c_k z^{k-k0} with log|c_k| supplied by logc(k).
template <class LogCoeff>
double power_series(double z, int k0, LogCoeff logc, const Tolerance& tol, const char* what) {
  if (z == 0.0) return std::exp(logc(k0));
  const double lz = std::log(std::abs(z));
  const bool alternate = z < 0.0;
  double sum = 0.0, max_term = 0.0;
  int small = 0;
  double prev_abs = std::numeric_limits<double>::infinity();
  for (int j = 0; j < tol.max_terms; ++j) {
    const int k = k0 + j;
    const double mag = std::exp(j * lz + logc(k));
    const double term = (alternate && (j & 1)) ? -mag : mag;
    sum += term;
    max_term = std::max(max_term, mag);
    const bool decreasing = mag < prev_abs;
    prev_abs = mag;
    if (decreasing && mag <= 0.25 * kEps * std::abs(sum)) {
      if (++small >= 2) {
        const double noise = 8.0 * kEps * max_term;
        if (noise > std::max(tol.abs_tol, tol.rel_tol * std::abs(sum)))
          throw EvaluationError(std::string(what) + ": cancellation exceeds tolerance", sum);
        return sum;
      }
    } else {
      small = 0;
    }
    if (decreasing && mag == 0.0) return sum;
  }
  throw EvaluationError(std::string(what) + ": series did not converge within max_terms", sum);
}

}  // namespace

void Tolerance::validate() const {
  if (!(abs_tol > 0.0)) throw PreconditionError("Tolerance: abs_tol must be > 0");
  if (!(rel_tol > 0.0)) throw PreconditionError("Tolerance: rel_tol must be > 0");
  if (max_terms < 16) throw PreconditionError("Tolerance: max_terms must be >= 16");
}

double series_radius(double alpha) { return std::min(5.0, std::pow(std::log(1e3), alpha)); }

double mittag_leffler_series(double alpha, double beta, double z, const Tolerance& tol) {
  check_alpha_beta(alpha, beta);
  tol.validate();
  return power_series(
      z, 0, [&](int k) { return -std::lgamma(alpha * k + beta); }, tol, "Mittag-Leffler");
}

double mittag_leffler_integral_part(double alpha, double beta, double z, const Tolerance& tol) {
  check_alpha_beta(alpha, beta);
  if (!(alpha < 1.0)) throw DomainError("Mittag-Leffler integral form needs alpha < 1");
  if (!(beta < 1.0 + alpha)) throw DomainError("Mittag-Leffler integral form needs beta < 1 + alpha");
  if (z == 0.0) throw DomainError("Mittag-Leffler integral form needs z != 0");
  const double p = (1.0 - beta) / alpha;
  const double s1 = std::sin(kPi * (1.0 - beta));
  const double s2 = std::sin(kPi * (1.0 - beta + alpha));
  const double c = std::cos(alpha * kPi);
  auto kernel = [&](double chi) {
    const double num = chi * s1 - z * s2;
    const double den = chi * chi - 2.0 * chi * z * c + z * z;
    return std::exp(p * std::log(chi) - std::pow(chi, 1.0 / alpha)) * num / den;
  };
  return quad::exp_map(kernel, inner(tol)) / (alpha * kPi);
}

double mittag_leffler_integral(double alpha, double beta, double z, const Tolerance& tol) {
  double v = mittag_leffler_integral_part(alpha, beta, z, tol);
  if (z > 0.0) v += std::pow(z, (1.0 - beta) / alpha) * std::exp(std::pow(z, 1.0 / alpha)) / alpha;
  return v;
}

double mittag_leffler(double alpha, double beta, double z, const Tolerance& tol) {
  check_alpha_beta(alpha, beta);
  tol.validate();
  if (!std::isfinite(z)) throw DomainError("Mittag-Leffler: z must be finite");
  if (z == 0.0) return 1.0 / std::tgamma(beta);
  if (alpha == 1.0 && beta == 1.0) return std::exp(z);
  if (std::abs(z) <= series_radius(alpha) || !(alpha < 1.0 && beta < 1.0 + alpha))
    return mittag_leffler_series(alpha, beta, z, tol);
  return mittag_leffler_integral(alpha, beta, z, tol);
}

double mittag_leffler_derivative(double alpha, double z, int order, const Tolerance& tol) {
  check_alpha_beta(alpha, 1.0);
  tol.validate();
  if (order < 0) throw DomainError("Mittag-Leffler derivative: order must be >= 0");
  if (order == 0) return mittag_leffler(alpha, 1.0, z, tol);
  if (alpha == 1.0) return std::exp(z);
  if (std::abs(z) <= series_radius(alpha)) {
    const int n = order;
    return power_series(
        z, n,
        [&](int k) { return std::lgamma(k + 1.0) - std::lgamma(k - n + 1.0) - std::lgamma(alpha * k + 1.0); },
        tol, "Mittag-Leffler derivative");
  }
  if (z > 0.0)
    throw UnsupportedError("Mittag-Leffler derivative: large positive arguments are not supported");
  // E_alpha(-x) = int_0^inf e^{-rx} K(r) dr with the spectral density K.
  const double sa = std::sin(alpha * kPi) / kPi;
  const double ca = std::cos(alpha * kPi);
  auto integrand = [&](double r) {
    const double ra = std::pow(r, alpha);
    const double dens = sa * ra / r / (ra * ra + 2.0 * ra * ca + 1.0);
    return std::exp(order * std::log(r) + r * z) * dens;
  };
  return quad::exp_map(integrand, inner(tol));
}

double rho_exponential(double rho, double z, const Tolerance& tol) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho-exponential: rho must lie in (0,1)");
  if (!(z > 0.0)) throw DomainError("rho-exponential: z must be > 0");
  return std::pow(z, rho - 1.0) * mittag_leffler(rho, rho, std::pow(z, rho), tol);
}

double scaled_rho_exponential(double rho, double z, const Tolerance& tol) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho-exponential: rho must lie in (0,1)");
  if (!(z > 0.0)) throw DomainError("rho-exponential: z must be > 0");
  const double zr = std::pow(z, rho);
  if (zr <= series_radius(rho))
    return std::exp(-z) * std::pow(z, rho - 1.0) * mittag_leffler_series(rho, rho, zr, tol);
  // The residue contributes exactly e^z / rho.
  return 1.0 / rho + std::pow(z, rho - 1.0) * std::exp(-z) * mittag_leffler_integral_part(rho, rho, zr, tol);
}

double upper_incomplete_gamma(double rho, double x) {
  if (!(rho > 0.0)) throw DomainError("incomplete gamma: rho must be > 0");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma: x must be >= 0");
  if (x == 0.0) return std::tgamma(rho);
  return boost::math::tgamma(rho, x);
}

double kraetzel(double nu, double rho, double u, const Tolerance& tol) {
  if (!(nu > 0.0 && rho > 0.0)) throw DomainError("Kraetzel: nu and rho must be > 0");
  if (!(u >= 0.0)) throw DomainError("Kraetzel: u must be >= 0");
  tol.validate();
  auto g = [&](double lam) {
    return std::exp((nu - 1.0) * std::log(lam) - u / lam - std::pow(lam, rho));
  };
  return quad::exp_map(g, inner(tol));
}

double kraetzel_density(double nu, double rho, double x, const Tolerance& tol) {
  if (x < 0.0) return 0.0;
  return rho / std::tgamma((nu + 1.0) / rho) * kraetzel(nu, rho, x, tol);
}

double mellin_quadrature(const std::function<double(double)>& f, double s, const Tolerance& tol) {
  tol.validate();
  if (!std::isfinite(s)) throw DomainError("Mellin: s must be finite");
  // (0,1) via t = e^{-w}, (1,inf) via t = e^{w}; both w-integrals over (0,inf).
  auto lower = [&](double w) { return f(std::exp(-w)) * std::exp(-s * w); };
  auto upper = [&](double w) { return f(std::exp(w)) * std::exp(s * w); };
  try {
    return quad::exp_map(lower, inner(tol)) + quad::exp_map(upper, inner(tol));
  } catch (const EvaluationError& e) {
    throw DomainError(std::string("Mellin integral diverges at s = ") + std::to_string(s) + ": " + e.what());
  }
}

}  // namespace rsfbm::specfun
