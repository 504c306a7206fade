#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "gcmax/error.hpp"

namespace gcmax {

inline constexpr std::size_t kDefaultQuadratureOrder = 16;

/// Gauss-Legendre nodes and weights mapped to [0, 1], nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule gauss_legendre_rule_01(std::size_t order = kDefaultQuadratureOrder) {
  if (order < 1) throw InvalidArgument("quadrature order must be at least 1");
  const int n = static_cast<int>(order);
  // Non-negative roots of P_n on [-1, 1]; mirror to get the rest.
  const std::vector<double> positive = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> roots;
  roots.reserve(order);
  for (double r : positive)
    if (r > 0.0) roots.push_back(-r);
  if (n % 2 == 1) roots.push_back(0.0);
  for (double r : positive)
    if (r > 0.0) roots.push_back(r);
  std::sort(roots.begin(), roots.end());

  QuadratureRule rule;
  rule.nodes.reserve(order);
  rule.weights.reserve(order);
  for (double x : roots) {
    const double dp = boost::math::legendre_p_prime<double>(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes.push_back(0.5 * (x + 1.0));
    rule.weights.push_back(0.5 * w);
  }
  return rule;
}

/// Fixed-order Gauss-Legendre approximation of the integral of f over [0, 1].
template <class F>
double gauss_legendre_01(F&& f, std::size_t order = kDefaultQuadratureOrder) {
  const QuadratureRule rule = gauss_legendre_rule_01(order);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * f(rule.nodes[k]);
  return acc;
}

/// Adaptive 61-point Gauss-Kronrod on [a, b] to relative tolerance `tol`.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-14, double* error_estimate = nullptr) {
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &err);
  if (error_estimate) *error_estimate = err;
  return value;
}

}  // namespace gcmax
