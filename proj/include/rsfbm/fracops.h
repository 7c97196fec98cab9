#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rsfbm/errors.h"

namespace rsfbm {

enum class Regime { sub, classical, super };

/// Hurst parameter with its regime tag; H must lie strictly inside (0,1).
class HurstModel {
 public:
  explicit HurstModel(double H);
  double H() const { return H_; }
  Regime regime() const { return regime_; }

 private:
  double H_;
  Regime regime_;
};

/// Deterministic integrand nu on [0, domain_end].
class Integrand {
 public:
  enum class Kind { constant, power_law, tabulated };

  static Integrand constant(double c, double domain_end = std::numeric_limits<double>::infinity());
  /// nu(s) = C s^beta, beta >= 0.
  static Integrand power_law(double C, double beta,
                             double domain_end = std::numeric_limits<double>::infinity());
  /// Linear interpolation of (grid, values); grid strictly increasing and starting at 0.
  static Integrand tabulated(std::vector<double> grid, std::vector<double> values);

  Kind kind() const { return kind_; }
  double scale() const { return c_; }
  double beta() const { return beta_; }
  double domain_end() const { return end_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double s) const;
  /// max |nu| over [0, T].
  double max_abs(double T) const;

 private:
  Integrand() = default;
  Kind kind_ = Kind::constant;
  double c_ = 1.0;
  double beta_ = 0.0;
  double end_ = std::numeric_limits<double>::infinity();
  std::vector<double> grid_, values_;
};

/// Throws PreconditionError naming the violated constraint when nu is not
/// allowed for the regime of h.
void check_admissible(const HurstModel& h, const Integrand& nu);

struct VarianceCurve {
  std::vector<double> grid;
  std::vector<double> v;
  std::vector<double> v_prime;
};

/// K_H = Gamma(H+1/2) (int_0^inf ((1+s)^{H-1/2} - s^{H-1/2})^2 ds + 1/(2H))^{-1/2}.
/// Evaluated by quadrature once per H and cached.
double k_h(double H);

/// (M_-^H 1_(s,t))(x).
double m_minus_indicator(const HurstModel& h, double s, double t, double x);

/// |t - s|^H.
double indicator_norm(const HurstModel& h, double s, double t);

/// v(t) = ||M_-^H(nu 1_(0,t))||^2.
double weighted_variance(const HurstModel& h, const Integrand& nu, double t);

/// dv/dt; +inf at t = 0 when H < 1/2 and nu != 0.
double variance_derivative(const HurstModel& h, const Integrand& nu, double t);

/// Cov(Y_s, Y_t) for Y_t = int_0^t nu dB^H.
double cross_covariance(const HurstModel& h, const Integrand& nu, double s, double t);

/// sigma_nu(t) = v(t)^{1/(2H)}.
double time_change(const HurstModel& h, const Integrand& nu, double t);

/// Smallest t in [0, T] with v(t) = w, for 0 <= w <= v(T) and nu of one sign.
double inverse_weighted_variance(const HurstModel& h, const Integrand& nu, double T, double w);

/// Derivative of sigma_nu.
double time_change_derivative(const HurstModel& h, const Integrand& nu, double t);

VarianceCurve variance_curve(const HurstModel& h, const Integrand& nu, std::span<const double> grid);

/// C_{H,beta} = (2H(2H-1)/(2beta+2H) B(beta+1, 2H-1))^{1/(2H)}, H in (1/2,1), beta >= 0.
double power_law_constant(double H, double beta);

/// Reference route for H > 1/2 that knows nothing about the form of nu:
/// 2H(2H-1) int_0^t nu(tau) int_0^tau nu(s)(tau-s)^{2H-2} ds dtau by nested tanh-sinh.
double weighted_variance_numeric(double H, const std::function<double(double)>& nu, double t);

/// Reference for dv/dt, same route as above.
double variance_derivative_numeric(double H, const std::function<double(double)>& nu, double t);

}  // namespace rsfbm
