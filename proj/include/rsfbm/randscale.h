#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rsfbm/homkernel.h"
#include "rsfbm/rng.h"

namespace rsfbm {

struct Dirac {
  double a0 = 1.0;
};
struct MittagLefflerLaw {
  double beta = 0.5;
};
struct GammaGrey {
  double rho = 0.5;
};
struct GeneralizedGamma {
  double x0 = 1.0, nu = 1.0, rho = 2.0;
};
struct BenderButko {
  HomogeneousKernel kernel;
};

/// Law of the random diffusion coefficient A.
class DiffusionModel {
 public:
  using Variant = std::variant<Dirac, MittagLefflerLaw, GammaGrey, GeneralizedGamma, BenderButko>;

  static DiffusionModel dirac(double a0);
  static DiffusionModel mittag_leffler(double beta);
  static DiffusionModel gamma_grey(double rho);
  static DiffusionModel generalized_gamma(double x0, double nu, double rho);
  static DiffusionModel bender_butko(HomogeneousKernel kernel);

  const Variant& variant() const { return v_; }
  std::string name() const;
  std::string describe() const;

  /// R_A: L[A] extends holomorphically to the disc of this radius around 0.
  double radius() const;
  bool sampleable() const;
  bool has_density() const;

  /// E[e^{-xA}], x > -radius (x >= 0 when the radius is 0).
  double laplace(double x) const;
  /// n-th derivative of the Laplace transform.
  double laplace_derivative(double x, int order) const;

  /// One exact draw. Throws UnsupportedError for the implicit Bender-Butko law.
  double sample(Engine& rng) const;
  double density(double a) const;
  /// density(support_lower() + d) with the offset d > 0 kept exact, so that a
  /// singularity at the lower end is resolved below the rounding of lower + d.
  double density_above_lower(double d) const;

  /// E[A^n]; +inf when the moment does not exist.
  double moment(int n) const;
  double mean() const { return moment(1); }
  double second_moment() const { return moment(2); }

  /// Lower end of the support (1 for gamma-grey, 0 otherwise, a0 for Dirac).
  double support_lower() const;

 private:
  explicit DiffusionModel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// x0 Gamma((nu+1)/rho) / Gamma(nu/rho): a f_{x0,nu,rho}(a) = factor * f_{x0,nu+1,rho}(a).
double moment_shift_factor(double x0, double nu, double rho);

/// Generalized gamma density rho/(x0^nu Gamma(nu/rho)) a^{nu-1} e^{-(a/x0)^rho}; any rho > 0.
double generalized_gamma_density(double x0, double nu, double rho, double a);

/// E[e^{-xA}] for the generalized gamma law by quadrature; any rho > 0, x > 0 when rho <= 1.
double generalized_gamma_laplace(double x0, double nu, double rho, double x);

/// Signed finite differences of orders 0..max_order of f on the equispaced
/// grid x0 + k h. Returns the number of entries whose sign breaks the
/// alternation (-1)^n D^n f >= 0 by more than `slack`.
int monotonicity_violations(const std::function<double(double)>& f, double x0, double h, int points,
                            int max_order = 4, double slack = 1e-12);

}  // namespace rsfbm
