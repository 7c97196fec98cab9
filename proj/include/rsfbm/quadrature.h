#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "rsfbm/errors.h"

namespace rsfbm::quad {

/// Nodes and weights of an interpolatory rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double apply(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

// Gauss rules are built by Golub-Welsch and then Newton-polished on the
// orthonormal recurrence; weights come from Christoffel sums so that tiny
// weights keep full relative accuracy.

/// Gauss-Legendre on [a, b].
Rule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// Gauss-Jacobi on [-1, 1] for the weight (1-x)^alpha (1+x)^beta, alpha, beta > -1.
Rule gauss_jacobi(std::size_t n, double alpha, double beta);

/// Gauss-Jacobi mapped to [0, 1] for the weight (1-u)^alpha u^beta.
Rule gauss_jacobi_unit(std::size_t n, double alpha, double beta);

/// Gauss-Hermite for the standard normal density: sum_i w_i f(x_i) ~ E[f(g)].
Rule gauss_hermite(std::size_t n);

/// Fixed tanh-sinh rule on [a, b]. For every node the distances to both ends
/// are stored separately so that singular factors like (b-x)^p can be
/// evaluated without cancellation.
struct EndpointRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> left;   // x - a
  std::vector<double> right;  // b - x

  std::size_t size() const { return nodes.size(); }
};

/// Step h = 2^-level in the tanh-sinh variable.
EndpointRule tanh_sinh_rule(double a, double b, int level);

struct Tolerances {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
};

/// Signature used by the endpoint-aware integrators: f(x, x - a, b - x).
using EndpointIntegrand = std::function<double(double, double, double)>;

/// Adaptive tanh-sinh on [a, b]; refines by halving until two successive
/// levels agree. Throws EvaluationError if level 10 is reached first.
double tanh_sinh(const EndpointIntegrand& f, double a, double b, Tolerances tol = {});

/// Convenience overload for integrands that do not need endpoint distances.
double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 Tolerances tol = {});

/// Integral of g over (0, inf) by the substitution lambda = e^y followed by the
/// trapezoid rule with step halving. The y-range is found by scanning for decay;
/// an integrand that has not decayed by |y| ~ 700 raises EvaluationError.
double exp_map(const std::function<double(double)>& g, Tolerances tol = {});

/// Integral of g over (lower, inf) with lambda = lower + e^y.
double exp_map_from(const std::function<double(double)>& g, double lower, Tolerances tol = {});

/// Adaptive Gauss-Kronrod (G7K15) on [a, b] for smooth integrands.
double gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                     Tolerances tol = {});

}  // namespace rsfbm::quad
