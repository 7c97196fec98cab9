#pragma once

#include <functional>

#include "rsfbm/errors.h"
#include "rsfbm/quadrature.h"

namespace rsfbm::specfun {

struct Tolerance {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_terms = 512;

  /// Throws std::invalid_argument unless abs_tol > 0, rel_tol > 0, max_terms >= 16.
  void validate() const;
  quad::Tolerances quad() const { return {abs_tol, rel_tol}; }
};

/// Radius below which the power series of E_{alpha,beta} is summed directly.
/// Beyond it the largest series term exceeds the result by more than 10^3 and
/// the integral representation is used instead.
double series_radius(double alpha);

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z,
/// alpha in (0,1], beta > 0.
double mittag_leffler(double alpha, double beta, double z, const Tolerance& tol = {});

/// Power series branch. Throws EvaluationError if cancellation would cost more
/// than the requested tolerance or max_terms is exhausted.
double mittag_leffler_series(double alpha, double beta, double z, const Tolerance& tol = {});

/// Integral representation branch, alpha in (0,1), beta < 1 + alpha, z != 0.
/// For z > 0 the residue term alpha^{-1} z^{(1-beta)/alpha} exp(z^{1/alpha}) is included.
double mittag_leffler_integral(double alpha, double beta, double z, const Tolerance& tol = {});

/// Only the real-line integral of the representation above (no residue term).
double mittag_leffler_integral_part(double alpha, double beta, double z, const Tolerance& tol = {});

/// n-th derivative of the one-parameter function E_alpha(z).
double mittag_leffler_derivative(double alpha, double z, int order, const Tolerance& tol = {});

/// e_rho(z) = z^{rho-1} E_{rho,rho}(z^rho), z > 0. Overflows to +inf for large z.
double rho_exponential(double rho, double z, const Tolerance& tol = {});

/// exp(-z) e_rho(z), evaluated without overflow; tends to 1/rho as z -> inf.
double scaled_rho_exponential(double rho, double z, const Tolerance& tol = {});

/// Upper incomplete gamma Gamma(rho, x) = int_x^inf e^{-w} w^{rho-1} dw.
double upper_incomplete_gamma(double rho, double x);

/// Kraetzel function Z^nu_rho(u) = int_0^inf lambda^{nu-1} e^{-u/lambda} e^{-lambda^rho} dlambda.
double kraetzel(double nu, double rho, double u, const Tolerance& tol = {});

/// Normalized Kraetzel density rho / Gamma((nu+1)/rho) * Z^nu_rho(x) on x > 0.
double kraetzel_density(double nu, double rho, double x, const Tolerance& tol = {});

/// Mellin transform int_0^inf f(t) t^{s-1} dt. f must be smooth on (0,1) and
/// on (1,inf); a jump at t = 1 is allowed. Non-decaying integrands raise DomainError.
double mellin_quadrature(const std::function<double(double)>& f, double s,
                         const Tolerance& tol = {});

}  // namespace rsfbm::specfun
