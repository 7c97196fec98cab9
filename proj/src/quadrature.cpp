#include "rsfbm/quadrature.h"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace rsfbm::quad {

namespace {

// Three-term recurrence of the orthonormal family:
//   x p_k = sqrt(b[k+1]) p_{k+1} + a[k] p_k + sqrt(b[k]) p_{k-1}
// b[0] is unused; mu0 is the total mass of the weight.
struct Recurrence {
  std::vector<double> a;
  std::vector<double> b;
  double mu0;
};

Rule from_recurrence(const Recurrence& rec, std::size_t n) {
  if (n == 0) throw std::invalid_argument("quadrature rule needs at least one node");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (std::size_t k = 0; k < n; ++k) diag[k] = rec.a[k];
  for (std::size_t k = 1; k < n; ++k) sub[k - 1] = std::sqrt(rec.b[k]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigen solve failed");

  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double p0 = 1.0 / std::sqrt(rec.mu0);
  for (std::size_t i = 0; i < n; ++i) {
    double x = es.eigenvalues()[static_cast<Eigen::Index>(i)];
    double christoffel = 0.0;
    for (int iter = 0; iter < 4; ++iter) {
      double pm1 = 0.0, p = p0, dpm1 = 0.0, dp = 0.0;
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        sum += p * p;
        const double sb_next = std::sqrt(rec.b[k + 1]);
        const double sb = k > 0 ? std::sqrt(rec.b[k]) : 0.0;
        const double pn = ((x - rec.a[k]) * p - sb * pm1) / sb_next;
        const double dpn = (p + (x - rec.a[k]) * dp - sb * dpm1) / sb_next;
        pm1 = p;
        p = pn;
        dpm1 = dp;
        dp = dpn;
      }
      christoffel = sum;
      if (dp == 0.0) break;
      const double step = p / dp;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 1.0 / christoffel;
  }
  return r;
}

Recurrence jacobi_recurrence(std::size_t n, double alpha, double beta) {
  Recurrence rec;
  rec.a.resize(n + 1);
  rec.b.resize(n + 2, 0.0);
  const double ab = alpha + beta;
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + ab;
    if (k == 0) {
      rec.a[k] = (beta - alpha) / (ab + 2.0);
    } else {
      rec.a[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
  }
  for (std::size_t k = 1; k <= n + 1; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + ab;
    if (k == 1) {
      rec.b[k] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      rec.b[k] = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
  }
  rec.mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                     std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  return rec;
}

}  // namespace

Rule gauss_jacobi(std::size_t n, double alpha, double beta) {
  if (!(alpha > -1.0) || !(beta > -1.0))
    throw DomainError("Gauss-Jacobi exponents must exceed -1");
  return from_recurrence(jacobi_recurrence(n, alpha, beta), n);
}

Rule gauss_legendre(std::size_t n, double a, double b) {
  Rule r = gauss_jacobi(n, 0.0, 0.0);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

Rule gauss_jacobi_unit(std::size_t n, double alpha, double beta) {
  // x in [-1,1] -> u = (1+x)/2, (1-x) = 2(1-u), (1+x) = 2u.
  Rule r = gauss_jacobi(n, alpha, beta);
  const double scale = std::pow(2.0, -(alpha + beta + 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    r.nodes[i] = 0.5 * (1.0 + r.nodes[i]);
    r.weights[i] *= scale;
  }
  return r;
}

Rule gauss_hermite(std::size_t n) {
  Recurrence rec;
  rec.a.assign(n + 1, 0.0);
  rec.b.resize(n + 2);
  for (std::size_t k = 0; k < rec.b.size(); ++k) rec.b[k] = static_cast<double>(k);
  rec.mu0 = 1.0;
  Rule r = from_recurrence(rec, n);
  // Symmetrize to remove O(eps) drift.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kTauMax = 6.5;

// Contribution of a single tanh-sinh abscissa tau to a rule on [a, b].
struct TsNode {
  double x, w, left, right;
  bool valid;
};

TsNode ts_node(double a, double b, double tau) {
  const double half = 0.5 * (b - a);
  const double u = kHalfPi * std::sinh(tau);
  const double e = std::exp(-2.0 * std::abs(u));
  // 1 - tanh|u| = 2e/(1+e), 1 + tanh|u| = 2/(1+e)
  const double near = half * 2.0 * e / (1.0 + e);
  const double far = half * 2.0 / (1.0 + e);
  const double w = half * kHalfPi * std::cosh(tau) * 4.0 * e / ((1.0 + e) * (1.0 + e));
  TsNode n{};
  if (u >= 0.0) {
    n.right = near;
    n.left = far;
    n.x = b - near;
  } else {
    n.left = near;
    n.right = far;
    n.x = a + near;
  }
  n.w = w;
  n.valid = near > 0.0 && w > 0.0 && std::isfinite(w);
  return n;
}

}  // namespace

EndpointRule tanh_sinh_rule(double a, double b, int level) {
  if (!(b > a)) throw DomainError("tanh-sinh interval must satisfy a < b");
  const double h = std::ldexp(1.0, -level);
  const int m = static_cast<int>(std::ceil(kTauMax / h));
  EndpointRule r;
  for (int j = -m; j <= m; ++j) {
    const TsNode n = ts_node(a, b, j * h);
    if (!n.valid) continue;
    r.nodes.push_back(n.x);
    r.weights.push_back(n.w * h);
    r.left.push_back(n.left);
    r.right.push_back(n.right);
  }
  return r;
}

double tanh_sinh(const EndpointIntegrand& f, double a, double b, Tolerances tol) {
  if (a == b) return 0.0;
  if (a > b) return -tanh_sinh(f, b, a, tol);
  auto eval = [&](double tau) {
    const TsNode n = ts_node(a, b, tau);
    if (!n.valid) return 0.0;
    const double v = f(n.x, n.left, n.right);
    return std::isfinite(v) ? n.w * v : 0.0;
  };
  // Level 0: integer taus.
  double sum = 0.0;
  const int m0 = static_cast<int>(kTauMax);
  for (int j = -m0; j <= m0; ++j) sum += eval(static_cast<double>(j));
  double h = 1.0;
  double prev = sum * h;
  for (int level = 1; level <= 10; ++level) {
    h *= 0.5;
    const int m = static_cast<int>(std::ceil(kTauMax / h));
    for (int j = 1; j < m; j += 2) sum += eval(j * h) + eval(-j * h);
    const double cur = sum * h;
    if (level >= 3 && std::abs(cur - prev) <= std::max(tol.abs_tol, tol.rel_tol * std::abs(cur)))
      return cur;
    prev = cur;
  }
  throw EvaluationError("tanh-sinh quadrature did not converge", prev);
}

double tanh_sinh(const std::function<double(double)>& f, double a, double b, Tolerances tol) {
  return tanh_sinh([&](double x, double, double) { return f(x); }, a, b, tol);
}

namespace {

// Locate a y-window outside of which |G| is negligible relative to its peak.
std::pair<double, double> decay_window(const std::function<double(double)>& G) {
  constexpr double kStep = 0.5;
  constexpr double kRel = 1e-18;
  double peak = 0.0, y_peak = 0.0;
  for (double y = -40.0; y <= 40.0; y += 1.0) {
    const double v = std::abs(G(y));
    if (std::isfinite(v) && v > peak) {
      peak = v;
      y_peak = y;
    }
  }
  if (peak == 0.0) return {0.0, 0.0};

  auto walk = [&](double dir, double limit) {
    int quiet = 0;
    double y = y_peak;
    while (dir * (limit - y) > 0.0) {
      y += dir * kStep;
      const double v = std::abs(G(y));
      if (std::isfinite(v) && v > peak) {
        peak = v;
        quiet = 0;
        continue;
      }
      if (!(v > kRel * peak)) {
        if (++quiet >= 4) return y;
      } else {
        quiet = 0;
      }
    }
    throw EvaluationError("integrand does not decay on (0, inf); integral diverges or decays too slowly",
                          std::numeric_limits<double>::quiet_NaN());
  };
  const double hi = walk(+1.0, 700.0);
  const double lo = walk(-1.0, -740.0);
  return {lo, hi};
}

double trapezoid_halving(const std::function<double(double)>& G, double lo, double hi, Tolerances tol) {
  if (hi <= lo) return 0.0;
  double h = 0.5;
  int n = static_cast<int>(std::ceil((hi - lo) / h));
  h = (hi - lo) / n;
  double sum = 0.0;
  for (int j = 0; j <= n; ++j) sum += G(lo + j * h);
  double prev = sum * h;
  for (int level = 1; level <= 14; ++level) {
    for (int j = 0; j < n; ++j) sum += G(lo + (j + 0.5) * h);
    n *= 2;
    h *= 0.5;
    const double cur = sum * h;
    if (level >= 2 && std::abs(cur - prev) <= std::max(tol.abs_tol, tol.rel_tol * std::abs(cur)))
      return cur;
    prev = cur;
  }
  throw EvaluationError("exp-map trapezoid did not converge", prev);
}

}  // namespace

double exp_map(const std::function<double(double)>& g, Tolerances tol) {
  auto G = [&](double y) {
    const double lam = std::exp(y);
    if (lam == 0.0 || !std::isfinite(lam)) return 0.0;
    const double v = g(lam) * lam;
    // NaN only comes from 0 * inf (an underflowed weight against an overflowing
    // factor) and counts as 0; a genuine overflow means the integral diverges.
    if (std::isinf(v))
      throw EvaluationError("integrand overflows on (0, inf); integral diverges",
                            std::numeric_limits<double>::infinity());
    return std::isnan(v) ? 0.0 : v;
  };
  const auto [lo, hi] = decay_window(G);
  return trapezoid_halving(G, lo, hi, tol);
}

double exp_map_from(const std::function<double(double)>& g, double lower, Tolerances tol) {
  return exp_map([&](double lam) { return g(lower + lam); }, tol);
}

double gauss_kronrod(const std::function<double(double)>& f, double a, double b, Tolerances tol) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 20, tol.rel_tol, &err, &l1);
  if (!(err <= std::max(tol.abs_tol, tol.rel_tol * std::abs(v)) * 100.0))
    throw EvaluationError("Gauss-Kronrod did not reach tolerance (error estimate " +
                              std::to_string(err) + ")",
                          v);
  return v;
}

}  // namespace rsfbm::quad
