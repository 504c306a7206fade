#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gcmax/error.hpp"

// Log-sum-exp smooth maximum Q_beta(x) = log(sum_i exp(beta x_i)) / beta, its
// softmax gradient p, and the derivatives of p. Everything is evaluated from
// exponents shifted by the hard maximum, so large beta * x never overflows.
namespace gcmax::smoothmax {

struct SmoothMaxEval {
  double beta = 0.0;
  double log_s = 0.0;  // log S_N = beta * q
  double q = 0.0;
  std::vector<double> p;
  double max_value = 0.0;
  std::size_t argmax = 0;
};

struct Scalars {
  double log_s;
  double q;
  double max_value;
  std::size_t argmax;
};

struct HardMax {
  double value;
  std::size_t index;
};

/// Lowest index attaining the maximum.
inline HardMax hard_max(std::span<const double> x) noexcept {
  HardMax best{x[0], 0};
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] > best.value) best = {x[i], i};
  return best;
}

/// Allocation-free core: writes the softmax weights into p (size N).
inline Scalars evaluate_into(std::span<const double> x, double beta, std::span<double> p) noexcept {
  const HardMax m = hard_max(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(beta * (x[i] - m.value));
    s += p[i];
  }
  const double inv = 1.0 / s;
  for (std::size_t i = 0; i < x.size(); ++i) p[i] *= inv;
  const double log_shifted = std::log(s);
  return {beta * m.value + log_shifted, m.value + log_shifted / beta, m.value, m.index};
}

inline void check_args(std::span<const double> x, double beta) {
  if (x.size() < 2) throw InvalidArgument("smooth max needs at least two coordinates");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
}

inline SmoothMaxEval eval(std::span<const double> x, double beta) {
  check_args(x, beta);
  SmoothMaxEval out;
  out.beta = beta;
  out.p.resize(x.size());
  const Scalars s = evaluate_into(x, beta, out.p);
  out.log_s = s.log_s;
  out.q = s.q;
  out.max_value = s.max_value;
  out.argmax = s.argmax;
  return out;
}

/// dQ/dx_i = p_i.
inline std::vector<double> grad_q(std::span<const double> x, double beta) { return eval(x, beta).p; }

inline Eigen::MatrixXd jacobian_from_p(std::span<const double> p, double beta) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd jac(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      jac(i, j) = beta * p[i] * ((i == j ? 1.0 : 0.0) - p[j]);
  return jac;
}

/// dp_i/dx_j = beta p_i (delta_ij - p_j). Also the Hessian of Q.
inline Eigen::MatrixXd jac_p(std::span<const double> x, double beta) {
  const auto e = eval(x, beta);
  return jacobian_from_p(e.p, beta);
}

/// d^2 p_i / dx_j dx_k = beta^2 p_i [ (d_ik - p_k) d_ij - p_j (d_ik + d_jk - 2 p_k) ].
inline Eigen::MatrixXd hess_p(std::span<const double> x, double beta, std::size_t i) {
  const auto e = eval(x, beta);
  if (i >= x.size()) throw IndexError("softmax index out of range");
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto& p = e.p;
  auto delta = [](Eigen::Index a, Eigen::Index b) { return a == b ? 1.0 : 0.0; };
  const auto ii = static_cast<Eigen::Index>(i);
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      h(j, k) = beta * beta * p[i] *
                ((delta(ii, k) - p[k]) * delta(ii, j) - p[j] * (delta(ii, k) + delta(j, k) - 2.0 * p[k]));
  return h;
}

/// max((x_0 + x_1) / 2, x_2, ..., x_{N-1}); for N = 2 just the average.
inline double reduced_max(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("reduced max needs at least two coordinates");
  double m = 0.5 * (x[0] + x[1]);
  for (std::size_t k = 2; k < x.size(); ++k) m = std::max(m, x[k]);
  return m;
}

inline double tail_max(std::span<const double> x, std::size_t from) noexcept {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = from; k < x.size(); ++k) m = std::max(m, x[k]);
  return m;
}

/// 1 iff (x_0 + x_1) / 2 > max(x_2, ...); the empty tail maximum is -inf.
inline double indicator_a_plus(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("event needs at least two coordinates");
  return 0.5 * (x[0] + x[1]) > tail_max(x, 2) ? 1.0 : 0.0;
}

/// 1 iff x_0 > max(x_1, ...).
inline double indicator_a1(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("event needs at least two coordinates");
  return x[0] > tail_max(x, 1) ? 1.0 : 0.0;
}

}  // namespace gcmax::smoothmax
