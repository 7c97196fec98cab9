#include "rsfbm/fracops.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "rsfbm/quadrature.h"

namespace rsfbm {

namespace {

constexpr quad::Tolerances kInnerTol{1e-15, 1e-13};

double pos_pow(double x, double p) { return x > 0.0 ? std::pow(x, p) : 0.0; }

// int_lo^hi (p + q s)(tau - s)^g ds for tau >= hi, g in (-1, 0).
double linear_segment_moment(double p, double q, double lo, double hi, double tau, double g) {
  const double wl = tau - hi, wh = tau - lo;
  const double a = (pos_pow(wh, g + 1.0) - pos_pow(wl, g + 1.0)) / (g + 1.0);
  const double b = (pos_pow(wh, g + 2.0) - pos_pow(wl, g + 2.0)) / (g + 2.0);
  return (p + q * tau) * a - q * b;
}

// J(tau, upper) = int_0^upper nu(s)(tau - s)^{2H-2} ds with upper <= tau, H > 1/2.
double inner_integral(double H, const Integrand& nu, double tau, double upper) {
  const double g = 2.0 * H - 2.0;
  if (upper <= 0.0) return 0.0;
  switch (nu.kind()) {
    case Integrand::Kind::constant:
      return nu.scale() * (std::pow(tau, g + 1.0) - pos_pow(tau - upper, g + 1.0)) / (g + 1.0);
    case Integrand::Kind::power_law: {
      const double b = nu.beta();
      const double x = std::min(1.0, upper / tau);
      // int_0^x u^b (1-u)^g du, unregularized incomplete beta
      const double ib = x >= 1.0 ? boost::math::beta(b + 1.0, g + 1.0)
                                 : boost::math::beta(b + 1.0, g + 1.0, x);
      return nu.scale() * std::pow(tau, b + g + 1.0) * ib;
    }
    case Integrand::Kind::tabulated: {
      const auto& xs = nu.grid();
      const auto& ys = nu.values();
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < xs.size() && xs[i] < upper; ++i) {
        const double lo = xs[i], hi = std::min(xs[i + 1], upper);
        const double q = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        const double p = ys[i] - q * xs[i];
        sum += linear_segment_moment(p, q, lo, hi, tau, g);
      }
      return sum;
    }
  }
  return 0.0;
}

// int_a^b f over the tabulated grid pieces, tanh-sinh on each.
double piecewise_tanh_sinh(const Integrand& nu, double a, double b,
                           const std::function<double(double)>& f) {
  std::vector<double> cuts{a};
  for (double x : nu.grid())
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += quad::tanh_sinh(f, cuts[i], cuts[i + 1], kInnerTol);
  return sum;
}

void check_time(const Integrand& nu, double t) {
  if (!(t >= 0.0)) throw DomainError("time must be >= 0");
  if (t > nu.domain_end() * (1.0 + 1e-14))
    throw DomainError("time " + std::to_string(t) + " lies beyond the integrand domain end " +
                      std::to_string(nu.domain_end()));
}

double integral_of_square(const Integrand& nu, double t) {
  switch (nu.kind()) {
    case Integrand::Kind::constant:
      return nu.scale() * nu.scale() * t;
    case Integrand::Kind::power_law:
      return nu.scale() * nu.scale() * std::pow(t, 2.0 * nu.beta() + 1.0) / (2.0 * nu.beta() + 1.0);
    case Integrand::Kind::tabulated: {
      // Simpson is exact for the piecewise quadratic nu^2.
      const auto& xs = nu.grid();
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < xs.size() && xs[i] < t; ++i) {
        const double lo = xs[i], hi = std::min(xs[i + 1], t);
        const double fl = nu(lo), fm = nu(0.5 * (lo + hi)), fh = nu(hi);
        sum += (hi - lo) / 6.0 * (fl * fl + 4.0 * fm * fm + fh * fh);
      }
      return sum;
    }
  }
  return 0.0;
}

}  // namespace

HurstModel::HurstModel(double H) : H_(H) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("Hurst parameter must lie in (0,1)");
  regime_ = H < 0.5 ? Regime::sub : (H == 0.5 ? Regime::classical : Regime::super);
}

Integrand Integrand::constant(double c, double domain_end) {
  if (!std::isfinite(c)) throw DomainError("constant integrand must be finite");
  if (!(domain_end > 0.0)) throw DomainError("integrand domain end must be > 0");
  Integrand nu;
  nu.kind_ = Kind::constant;
  nu.c_ = c;
  nu.end_ = domain_end;
  return nu;
}

Integrand Integrand::power_law(double C, double beta, double domain_end) {
  if (!std::isfinite(C)) throw DomainError("power-law scale must be finite");
  if (!(beta >= 0.0)) throw DomainError("power-law exponent beta must be >= 0");
  if (!(domain_end > 0.0)) throw DomainError("integrand domain end must be > 0");
  Integrand nu;
  nu.kind_ = Kind::power_law;
  nu.c_ = C;
  nu.beta_ = beta;
  nu.end_ = domain_end;
  return nu;
}

Integrand Integrand::tabulated(std::vector<double> grid, std::vector<double> values) {
  if (grid.size() < 2 || grid.size() != values.size())
    throw DomainError("tabulated integrand needs >= 2 points and matching value count");
  if (grid.front() != 0.0) throw DomainError("tabulated integrand grid must start at 0");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(grid[i]))
      throw DomainError("tabulated integrand values must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("tabulated grid must be strictly increasing");
  }
  Integrand nu;
  nu.kind_ = Kind::tabulated;
  nu.end_ = grid.back();
  nu.grid_ = std::move(grid);
  nu.values_ = std::move(values);
  return nu;
}

double Integrand::operator()(double s) const {
  switch (kind_) {
    case Kind::constant:
      return c_;
    case Kind::power_law:
      return beta_ == 0.0 ? c_ : c_ * pos_pow(s, beta_);
    case Kind::tabulated: {
      if (s <= grid_.front()) return values_.front();
      if (s >= grid_.back()) return values_.back();
      const auto it = std::upper_bound(grid_.begin(), grid_.end(), s);
      const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
      const double w = (s - grid_[i]) / (grid_[i + 1] - grid_[i]);
      return values_[i] + w * (values_[i + 1] - values_[i]);
    }
  }
  return 0.0;
}

double Integrand::max_abs(double T) const {
  switch (kind_) {
    case Kind::constant:
      return std::abs(c_);
    case Kind::power_law:
      return beta_ == 0.0 ? std::abs(c_) : std::abs(c_) * std::pow(T, beta_);
    case Kind::tabulated: {
      double m = std::abs((*this)(std::min(T, end_)));
      for (std::size_t i = 0; i < grid_.size() && grid_[i] <= T; ++i) m = std::max(m, std::abs(values_[i]));
      return m;
    }
  }
  return 0.0;
}

void check_admissible(const HurstModel& h, const Integrand& nu) {
  if (h.regime() == Regime::sub && nu.kind() != Integrand::Kind::constant)
    throw PreconditionError("H<1/2 requires constant nu");
  if (nu.kind() == Integrand::Kind::power_law && nu.beta() > 0.0 && h.regime() != Regime::super)
    throw PreconditionError("power-law nu with beta>0 requires H>1/2");
}

double k_h(double H) {
  static std::mutex mu;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(H); it != cache.end()) return it->second;
  }
  if (!(H > 0.0 && H < 1.0)) throw DomainError("K_H needs H in (0,1)");
  const double p = H - 0.5;
  auto f = [p](double s) {
    // (1+s)^p - s^p = s^p expm1(p log1p(1/s)), stable for large s
    const double d = s > 1.0 ? std::pow(s, p) * std::expm1(p * std::log1p(1.0 / s))
                             : std::pow(1.0 + s, p) - std::pow(s, p);
    return d * d;
  };
  const double integral = quad::exp_map(f, {1e-16, 1e-14});
  const double value = std::tgamma(H + 0.5) / std::sqrt(integral + 1.0 / (2.0 * H));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(H, value);
  return value;
}

double m_minus_indicator(const HurstModel& h, double s, double t, double x) {
  if (s == t) return 0.0;
  if (h.regime() == Regime::classical) {
    if (s < t) return (x > s && x < t) ? 1.0 : 0.0;
    return (x > t && x < s) ? -1.0 : 0.0;
  }
  const double p = h.H() - 0.5;
  return k_h(h.H()) / std::tgamma(h.H() + 0.5) * (pos_pow(t - x, p) - pos_pow(s - x, p));
}

double indicator_norm(const HurstModel& h, double s, double t) { return std::pow(std::abs(t - s), h.H()); }

double weighted_variance(const HurstModel& h, const Integrand& nu, double t) {
  check_admissible(h, nu);
  check_time(nu, t);
  if (t == 0.0) return 0.0;
  const double H = h.H();
  if (nu.kind() == Integrand::Kind::constant) return nu.scale() * nu.scale() * std::pow(t, 2.0 * H);
  if (h.regime() == Regime::classical) return integral_of_square(nu, t);
  const double c2 = 2.0 * H * (2.0 * H - 1.0);
  if (nu.kind() == Integrand::Kind::power_law) {
    const double b = nu.beta();
    return nu.scale() * nu.scale() * c2 / (2.0 * b + 2.0 * H) * std::beta(b + 1.0, 2.0 * H - 1.0) *
           std::pow(t, 2.0 * b + 2.0 * H);
  }
  return c2 * piecewise_tanh_sinh(nu, 0.0, t, [&](double tau) { return nu(tau) * inner_integral(H, nu, tau, tau); });
}

double variance_derivative(const HurstModel& h, const Integrand& nu, double t) {
  check_admissible(h, nu);
  check_time(nu, t);
  const double H = h.H();
  if (nu.kind() == Integrand::Kind::constant) {
    const double c2 = nu.scale() * nu.scale();
    if (t == 0.0) {
      if (h.regime() == Regime::sub) return c2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      return h.regime() == Regime::classical ? c2 : 0.0;
    }
    return 2.0 * H * c2 * std::pow(t, 2.0 * H - 1.0);
  }
  if (h.regime() == Regime::classical) {
    const double v = nu(t);
    return v * v;
  }
  if (t == 0.0) return 0.0;
  if (nu.kind() == Integrand::Kind::power_law) {
    const double b = nu.beta();
    return nu.scale() * nu.scale() * 2.0 * H * (2.0 * H - 1.0) * std::beta(b + 1.0, 2.0 * H - 1.0) *
           std::pow(t, 2.0 * b + 2.0 * H - 1.0);
  }
  return 2.0 * H * (2.0 * H - 1.0) * nu(t) * inner_integral(H, nu, t, t);
}

double cross_covariance(const HurstModel& h, const Integrand& nu, double s, double t) {
  check_admissible(h, nu);
  if (s > t) std::swap(s, t);
  check_time(nu, t);
  if (s <= 0.0) return 0.0;
  const double H = h.H();
  if (nu.kind() == Integrand::Kind::constant)
    return nu.scale() * nu.scale() * 0.5 *
           (std::pow(t, 2.0 * H) + std::pow(s, 2.0 * H) - std::pow(t - s, 2.0 * H));
  if (h.regime() == Regime::classical) return integral_of_square(nu, s);
  const double vs = weighted_variance(h, nu, s);
  if (t == s) return vs;
  // v(s) + H(2H-1) int_s^t nu(w) int_0^s nu(u)(w-u)^{2H-2} du dw
  const double cross = piecewise_tanh_sinh(nu, s, t, [&](double w) { return nu(w) * inner_integral(H, nu, w, s); });
  return vs + H * (2.0 * H - 1.0) * cross;
}

double time_change(const HurstModel& h, const Integrand& nu, double t) {
  if (t == 0.0) return 0.0;
  return std::pow(weighted_variance(h, nu, t), 1.0 / (2.0 * h.H()));
}

double inverse_weighted_variance(const HurstModel& h, const Integrand& nu, double T, double w) {
  const double vT = weighted_variance(h, nu, T);
  if (w <= 0.0) return 0.0;
  if (w >= vT) return T;
  const double u = w / vT;
  if (nu.kind() == Integrand::Kind::constant) return T * std::pow(u, 1.0 / (2.0 * h.H()));
  if (nu.kind() == Integrand::Kind::power_law) {
    const double p = h.regime() == Regime::super ? 2.0 * nu.beta() + 2.0 * h.H() : 2.0 * nu.beta() + 1.0;
    return T * std::pow(u, 1.0 / p);
  }
  std::uintmax_t iters = 200;
  auto f = [&](double t) { return weighted_variance(h, nu, t) - w; };
  const auto r = boost::math::tools::toms748_solve(f, 0.0, T, -w, vT - w, boost::math::tools::eps_tolerance<double>(50),
                                                   iters);
  return 0.5 * (r.first + r.second);
}

double time_change_derivative(const HurstModel& h, const Integrand& nu, double t) {
  check_admissible(h, nu);
  check_time(nu, t);
  const double H = h.H();
  if (nu.kind() == Integrand::Kind::constant) return std::pow(std::abs(nu.scale()), 1.0 / H);
  if (nu.kind() == Integrand::Kind::power_law && h.regime() == Regime::super) {
    // sigma = (v(1))^{1/2H} t^{1+beta/H}
    const double b = nu.beta();
    const double v1 = nu.scale() * nu.scale() * 2.0 * H * (2.0 * H - 1.0) / (2.0 * b + 2.0 * H) *
                      std::beta(b + 1.0, 2.0 * H - 1.0);
    const double gain = std::pow(v1, 1.0 / (2.0 * H)) * (1.0 + b / H);
    return b == 0.0 ? gain : gain * pos_pow(t, b / H);
  }
  if (t == 0.0) throw DomainError("time-change derivative at t = 0 is only available in closed form");
  const double v = weighted_variance(h, nu, t);
  return std::pow(v, 1.0 / (2.0 * H) - 1.0) * variance_derivative(h, nu, t) / (2.0 * H);
}

VarianceCurve variance_curve(const HurstModel& h, const Integrand& nu, std::span<const double> grid) {
  VarianceCurve c;
  c.grid.assign(grid.begin(), grid.end());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("variance curve grid must be increasing");
    c.v.push_back(weighted_variance(h, nu, grid[i]));
    c.v_prime.push_back(variance_derivative(h, nu, grid[i]));
  }
  return c;
}

double power_law_constant(double H, double beta) {
  if (!(H > 0.5 && H < 1.0)) throw DomainError("C_{H,beta} needs H in (1/2,1)");
  if (!(beta >= 0.0)) throw DomainError("C_{H,beta} needs beta >= 0");
  if (beta == 0.0) return 1.0;
  const double inner = 2.0 * H * (2.0 * H - 1.0) / (2.0 * beta + 2.0 * H) * std::beta(beta + 1.0, 2.0 * H - 1.0);
  return std::pow(inner, 1.0 / (2.0 * H));
}

namespace {

double numeric_inner(double H, const std::function<double(double)>& nu, double tau) {
  const double g = 2.0 * H - 2.0;
  return quad::tanh_sinh([&](double s, double, double right) { return nu(s) * std::pow(right, g); }, 0.0, tau,
                         kInnerTol);
}

}  // namespace

double weighted_variance_numeric(double H, const std::function<double(double)>& nu, double t) {
  if (!(H > 0.5 && H < 1.0)) throw DomainError("numeric variance route needs H in (1/2,1)");
  if (t == 0.0) return 0.0;
  const double outer = quad::tanh_sinh([&](double tau) { return nu(tau) * numeric_inner(H, nu, tau); }, 0.0, t,
                                       {1e-14, 1e-12});
  return 2.0 * H * (2.0 * H - 1.0) * outer;
}

double variance_derivative_numeric(double H, const std::function<double(double)>& nu, double t) {
  if (!(H > 0.5 && H < 1.0)) throw DomainError("numeric variance route needs H in (1/2,1)");
  if (t == 0.0) return 0.0;
  return 2.0 * H * (2.0 * H - 1.0) * nu(t) * numeric_inner(H, nu, t);
}

}  // namespace rsfbm
