#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rsfbm/specfun.h"

namespace rsfbm {

/// Kernel k(t,s) on 0 < s < t, homogeneous of degree theta-1:
/// k(t, t s) = t^{theta-1} k(1, s).
class HomogeneousKernel {
 public:
  /// Kernel of generalized grey Brownian motion,
  /// k(t,s) = alpha/(beta Gamma(beta)) s^{alpha/beta-1} (t^{alpha/beta} - s^{alpha/beta})^{beta-1}, theta = alpha.
  static HomogeneousKernel ggbm(double alpha, double beta);

  /// User kernel from k(1, s). `moment` may supply int_0^1 k(1,s) s^{theta(n-1)} ds in closed form.
  static HomogeneousKernel custom(double theta, std::function<double(double)> k_unit, double epsilon,
                                  std::function<double(int)> moment = {});

  double theta() const;
  double epsilon() const;
  bool is_ggbm() const;
  double ggbm_alpha() const;
  double ggbm_beta() const;
  std::string describe() const;

  /// k(1, s) with the distance 1 - s passed separately for accuracy near s = 1.
  double k_unit(double s, double one_minus_s) const;
  double k_unit(double s) const { return k_unit(s, 1.0 - s); }
  /// k(t, s) for 0 < s < t.
  double operator()(double t, double s) const;

  /// m_n = int_0^1 k(1,s) s^{theta(n-1)} ds, n >= 1; closed form when available.
  double moment(int n) const;
  /// Same integral, always by tanh-sinh quadrature.
  double moment_quadrature(int n) const;

  /// c_0 .. c_{count-1} with c_0 = 1, c_n = c_{n-1} m_n.
  std::vector<double> coefficients(int count) const;

  /// Phi_k(z) = sum_n c_n (-z)^n and its derivatives in z.
  double phi(double z, const specfun::Tolerance& tol = {}) const;
  double phi_derivative(double z, int order, const specfun::Tolerance& tol = {}) const;

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace rsfbm
