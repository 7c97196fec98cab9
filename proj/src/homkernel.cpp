#include "rsfbm/homkernel.h"

#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "rsfbm/quadrature.h"

namespace rsfbm {

namespace {

namespace bmp = boost::multiprecision;
// 200 digits: the alternating series for Phi_k at z = 10, beta = 0.4 has terms
// near 1e137, so double precision would return noise.
using mp_t = bmp::number<bmp::cpp_bin_float<200>, bmp::et_off>;

constexpr int kMaxExactTerms = 50000;

}  // namespace

struct HomogeneousKernel::Impl {
  double theta = 1.0;
  double eps = 1.0;
  bool ggbm = false;
  double alpha = 1.0, beta = 1.0;
  std::function<double(double, double)> kunit;
  std::function<double(int)> moment_fn;

  std::mutex mu;
  std::vector<double> c_d{1.0};
  std::vector<mp_t> c_mp{mp_t(1)};

  void extend_double(std::size_t n, const HomogeneousKernel& self) {
    while (c_d.size() < n) {
      const int k = static_cast<int>(c_d.size());
      c_d.push_back(c_d.back() * self.moment(k));
    }
  }

  void extend_exact(std::size_t n) {
    const mp_t b(beta);
    while (c_mp.size() < n) {
      const int k = static_cast<int>(c_mp.size());
      // m_k = Gamma(beta(k-1)+1) / Gamma(beta k + 1)
      c_mp.push_back(c_mp.back() * boost::math::tgamma_ratio(mp_t(b * (k - 1) + 1), mp_t(b * k + 1)));
    }
  }
};

namespace {

using std::abs;

// sum_{n>=d} c_n (-1)^n n!/(n-d)! z^{n-d}, with the coefficient source coef(n).
template <class Real, class Coef>
Real sum_series(Coef&& coef, double z_in, int d, double small, int cap, int& used, Real& max_term) {
  const Real z(z_in);
  Real sum(0), zp(1), ff(1);
  for (int k = 2; k <= d; ++k) ff *= k;  // d!/(0)!
  max_term = Real(0);
  Real prev_mag(std::numeric_limits<double>::infinity());
  int quiet = 0;
  for (int n = d; n < cap; ++n) {
    if (n > d) {
      zp *= z;
      ff = ff * Real(n) / Real(n - d);
    }
    Real term = coef(n) * ff * zp;
    if (n & 1) term = -term;
    sum += term;
    const Real mag = abs(term);
    if (mag > max_term) max_term = mag;
    const bool decreasing = mag <= prev_mag;
    prev_mag = mag;
    if (z_in == 0.0) {
      used = n + 1;
      return sum;
    }
    if (decreasing && mag <= Real(small) * abs(sum)) {
      if (++quiet >= 4) {
        used = n + 1;
        return sum;
      }
    } else {
      quiet = 0;
    }
  }
  used = cap;
  throw EvaluationError("Phi_k series did not converge within " + std::to_string(cap) + " terms",
                        static_cast<double>(sum));
}

}  // namespace

HomogeneousKernel HomogeneousKernel::ggbm(double alpha, double beta) {
  if (!(alpha > 0.0)) throw DomainError("GGBM kernel needs alpha > 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("GGBM kernel needs beta in (0,1]");
  HomogeneousKernel k;
  k.impl_ = std::make_shared<Impl>();
  auto& im = *k.impl_;
  im.theta = alpha;
  im.ggbm = true;
  im.alpha = alpha;
  im.beta = beta;
  // k(1, .) lies in L^{1+eps} for (1+eps)(beta-1) > -1 and (1+eps)(alpha/beta-1) > -1
  double e = 1.0;
  if (beta < 1.0) e = std::min(e, 0.5 * beta / (1.0 - beta));
  if (alpha < beta) e = std::min(e, 0.5 * (alpha / beta) / (1.0 - alpha / beta));
  im.eps = e;
  const double a = alpha / beta;
  const double pre = alpha / (beta * std::tgamma(beta));
  im.kunit = [a, beta, pre](double s, double r) {
    if (!(s > 0.0) || !(r > 0.0)) return 0.0;
    const double one_minus = s > 0.5 ? -std::expm1(a * std::log1p(-r)) : 1.0 - std::pow(s, a);
    const double left = a == 1.0 ? 1.0 : std::pow(s, a - 1.0);
    const double right = beta == 1.0 ? 1.0 : std::pow(one_minus, beta - 1.0);
    return pre * left * right;
  };
  im.moment_fn = [beta](int n) { return std::exp(std::lgamma(beta * (n - 1) + 1.0) - std::lgamma(beta * n + 1.0)); };
  return k;
}

HomogeneousKernel HomogeneousKernel::custom(double theta, std::function<double(double)> k_unit, double epsilon,
                                            std::function<double(int)> moment) {
  if (!(theta > 0.0)) throw DomainError("kernel degree needs theta > 0");
  if (!(epsilon > 0.0)) throw DomainError("kernel integrability exponent must be > 0");
  if (!k_unit) throw DomainError("kernel needs k(1, s)");
  HomogeneousKernel k;
  k.impl_ = std::make_shared<Impl>();
  k.impl_->theta = theta;
  k.impl_->eps = epsilon;
  k.impl_->kunit = [f = std::move(k_unit)](double s, double) { return f(s); };
  k.impl_->moment_fn = std::move(moment);
  return k;
}

double HomogeneousKernel::theta() const { return impl_->theta; }
double HomogeneousKernel::epsilon() const { return impl_->eps; }
bool HomogeneousKernel::is_ggbm() const { return impl_->ggbm; }
double HomogeneousKernel::ggbm_alpha() const { return impl_->alpha; }
double HomogeneousKernel::ggbm_beta() const { return impl_->beta; }

std::string HomogeneousKernel::describe() const {
  std::ostringstream os;
  if (impl_->ggbm)
    os << "ggbm(alpha=" << impl_->alpha << ",beta=" << impl_->beta << ")";
  else
    os << "custom(theta=" << impl_->theta << ")";
  return os.str();
}

double HomogeneousKernel::k_unit(double s, double one_minus_s) const { return impl_->kunit(s, one_minus_s); }

double HomogeneousKernel::operator()(double t, double s) const {
  if (!(t > 0.0) || !(s > 0.0) || !(s < t)) return 0.0;
  return std::pow(t, impl_->theta - 1.0) * impl_->kunit(s / t, (t - s) / t);
}

double HomogeneousKernel::moment(int n) const {
  if (n < 1) throw DomainError("kernel moment index must be >= 1");
  if (impl_->moment_fn) return impl_->moment_fn(n);
  return moment_quadrature(n);
}

double HomogeneousKernel::moment_quadrature(int n) const {
  if (n < 1) throw DomainError("kernel moment index must be >= 1");
  const double p = impl_->theta * (n - 1);
  return quad::tanh_sinh(
      [&](double s, double, double r) { return impl_->kunit(s, r) * (p == 0.0 ? 1.0 : std::pow(s, p)); }, 0.0, 1.0,
      {1e-15, 1e-13});
}

std::vector<double> HomogeneousKernel::coefficients(int count) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->extend_double(static_cast<std::size_t>(count), *this);
  return {impl_->c_d.begin(), impl_->c_d.begin() + count};
}

double HomogeneousKernel::phi(double z, const specfun::Tolerance& tol) const { return phi_derivative(z, 0, tol); }

double HomogeneousKernel::phi_derivative(double z, int order, const specfun::Tolerance& tol) const {
  if (order < 0) throw DomainError("Phi_k derivative order must be >= 0");
  if (!std::isfinite(z)) throw DomainError("Phi_k argument must be finite");
  tol.validate();
  std::lock_guard<std::mutex> lock(impl_->mu);
  int used = 0;
  if (impl_->ggbm) {
    auto coef = [&](int n) -> const mp_t& {
      if (static_cast<std::size_t>(n) >= impl_->c_mp.size()) impl_->extend_exact(static_cast<std::size_t>(n) + 64);
      return impl_->c_mp[static_cast<std::size_t>(n)];
    };
    mp_t max_term;
    const mp_t s = sum_series<mp_t>(coef, z, order, 1e-30, kMaxExactTerms, used, max_term);
    return static_cast<double>(s);
  }
  auto coef = [&](int n) -> double {
    if (static_cast<std::size_t>(n) >= impl_->c_d.size()) impl_->extend_double(static_cast<std::size_t>(n) + 16, *this);
    return impl_->c_d[static_cast<std::size_t>(n)];
  };
  double max_term = 0.0;
  const double s = sum_series<double>(coef, z, order, 0.25 * std::numeric_limits<double>::epsilon(),
                                      tol.max_terms, used, max_term);
  const double noise = 8.0 * used * std::numeric_limits<double>::epsilon() * max_term;
  if (noise > std::max(tol.abs_tol, tol.rel_tol * std::abs(s)))
    throw EvaluationError("Phi_k series loses precision to cancellation at z = " + std::to_string(z), s);
  return s;
}

}  // namespace rsfbm
