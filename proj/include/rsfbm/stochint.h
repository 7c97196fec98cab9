#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "rsfbm/fbm.h"
#include "rsfbm/fracops.h"
#include "rsfbm/randscale.h"

namespace rsfbm {

/// Constants of |G(t, sqrt(a) z, a)| <= C exp(c a + lambda z^2).
struct GrowthCertificate {
  double C = 0.0;
  double c = 0.0;
  double lambda = 0.0;
};

/// F(t, z, a) together with the partial derivatives the Ito formula needs.
struct Functional {
  using Fn = std::function<double(double, double, double)>;
  std::string name;
  Fn F, dt, dz, dzz;
  bool time_dependent = false;
  /// Optional closed forms of E[g(t, sqrt(var) Z, a)], Z ~ N(0,1), for g = F, dt, dzz.
  /// The quadrature oracle falls back to Gauss-Hermite when these are empty.
  Fn mean_F, mean_dt, mean_dzz;
  /// Builds (C, c, lambda) valid for F, dF/dt, a dF/dz and a d2F/dz2 given
  /// R_A and the lambda ceiling; returns false with a reason when impossible.
  std::function<bool(double radius, double lambda_max, GrowthCertificate&, std::string&)> certify;
};

/// z^n for even n >= 2.
Functional functional_power(int n);
Functional functional_cos();
/// e^{kappa z}.
Functional functional_exp(double kappa);
/// "z2", "z4", "cos", "exp:<kappa>".
Functional functional_from_name(const std::string& name);

struct Admissibility {
  bool ok = false;
  std::string violated;
  GrowthCertificate cert;
  double lambda_max = 0.0;
};

/// Certificate construction plus probing on a 20x20x20 grid of (t, z, a).
Admissibility check_admissibility(const Functional& F, const HurstModel& h, const Integrand& nu,
                                  const DiffusionModel& model, double T);

/// Largest k for which V with growth e^{k|z|} is admissible: sqrt(2 R_A) / (2 T^H max|nu|).
double exponential_growth_bound(double radius, double H, double T, double max_nu);

struct ItoOptions {
  std::size_t n_time_nodes = 64;
  std::size_t gh_nodes = 96;
  bool enforce_admissibility = true;
  /// Exponent m of the variance clock w = v(T) u^m; 0 picks 3/rho for gamma-grey, 1 otherwise.
  double clock_grading = 0.0;
  unsigned threads = 0;
};

struct ItoReport {
  std::string functional;
  std::string model;
  double H = 0.0, T = 0.0;
  double lhs = 0.0;  // E[F(T, Z_T, A)]
  double initial = 0.0;
  double time_term = 0.0;
  double variance_term = 0.0;
  double residual = 0.0;
  double mc_stderr = 0.0;
  double quadrature_residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_paths = 0;
  bool admissible = true;
  std::string note;

  std::string to_json() const;
};

/// Monte Carlo estimate of E[F(T,Z_T,A)] - E[F(0,0,A)] - int E[dF/dt] dt - 1/2 int v' E[A d2F/dz2] dt.
ItoReport ito_expectation_residual_mc(const Functional& F, const HurstModel& h, const Integrand& nu,
                                      const DiffusionModel& model, double T, std::size_t n_paths, std::uint64_t seed,
                                      const ItoOptions& opts = {});

struct QuadratureTerms {
  double lhs = 0.0, initial = 0.0, time_term = 0.0, variance_term = 0.0, residual = 0.0;
};

/// Deterministic oracle: Gauss-Hermite in z given A = a, Gauss-Legendre in time,
/// adaptive quadrature in a against the density (or the atom for Dirac).
QuadratureTerms ito_expectation_quadrature(const Functional& F, const HurstModel& h, const Integrand& nu,
                                           const DiffusionModel& model, double T, const ItoOptions& opts = {});

double ito_expectation_residual_quadrature(const Functional& F, const HurstModel& h, const Integrand& nu,
                                           const DiffusionModel& model, double T, const ItoOptions& opts = {});

struct QuadraticReport {
  double mean = 0.0, mean_se = 0.0;
  double second = 0.0, second_se = 0.0;
  double expected_second = 0.0;
  bool second_checked = true;
  std::string note;
};

/// Statistics of 1/2 (X_t^2 - A t^{2H}) over n_paths draws.
QuadraticReport quadratic_identity_moments(const HurstModel& h, const DiffusionModel& model, double t,
                                           std::size_t n_paths, std::uint64_t seed, unsigned threads = 0);

enum class ExponentConvention { derivative, plain };

/// g0 exp(phi(A) int_0^t r - (A/2) w(t) + Z_t) on the grid, with w = v' (derivative) or v (plain).
PathEnsemble geometric_rsgp(double g0, const std::function<double(double)>& phi,
                            const std::function<double(double)>& r, const Integrand& nu, const HurstModel& h,
                            const DiffusionModel& model, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, ExponentConvention convention, const FbmOptions& opts = {});

}  // namespace rsfbm
