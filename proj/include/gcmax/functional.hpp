#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "gcmax/correlation.hpp"
#include "gcmax/error.hpp"
#include "gcmax/smoothmax.hpp"

namespace gcmax {

enum class FunctionalKind {
  Coordinate,      // x_i
  SmoothMax,       // Q_beta
  LogSum,          // log S_N = beta Q_beta
  Softmax,         // p_i
  SoftmaxProduct,  // p_i p_j
  SoftmaxSpread,   // p_i (1 - p_i)
  HardMax,         // M_N
  ReducedMax,      // M'_N
  IndicatorAPlus,  // 1{(x_0 + x_1)/2 > max(x_2, ...)}
  IndicatorA1,     // 1{x_0 > max(x_1, ...)}
  SquaredNorm,     // |x|^2
  Constant,
};

/// A scalar function of one Gaussian draw, described by value so it can be
/// serialized, compared and differentiated. Indices are zero-based.
struct Functional {
  FunctionalKind kind = FunctionalKind::Coordinate;
  double beta = 1.0;
  std::size_t i = 0;
  std::size_t j = 1;
  double constant = 0.0;

  static Functional coordinate(std::size_t i) { return {FunctionalKind::Coordinate, 1.0, i, 0, 0.0}; }
  static Functional smooth_max(double beta) { return {FunctionalKind::SmoothMax, beta, 0, 1, 0.0}; }
  static Functional log_sum(double beta) { return {FunctionalKind::LogSum, beta, 0, 1, 0.0}; }
  static Functional softmax(double beta, std::size_t i) { return {FunctionalKind::Softmax, beta, i, 0, 0.0}; }
  static Functional softmax_product(double beta, std::size_t i, std::size_t j) {
    return {FunctionalKind::SoftmaxProduct, beta, i, j, 0.0};
  }
  static Functional softmax_spread(double beta, std::size_t i) {
    return {FunctionalKind::SoftmaxSpread, beta, i, 0, 0.0};
  }
  static Functional hard_max() { return {FunctionalKind::HardMax, 1.0, 0, 1, 0.0}; }
  static Functional reduced_max() { return {FunctionalKind::ReducedMax, 1.0, 0, 1, 0.0}; }
  static Functional indicator_a_plus() { return {FunctionalKind::IndicatorAPlus, 1.0, 0, 1, 0.0}; }
  static Functional indicator_a1() { return {FunctionalKind::IndicatorA1, 1.0, 0, 1, 0.0}; }
  static Functional squared_norm() { return {FunctionalKind::SquaredNorm, 1.0, 0, 1, 0.0}; }
  static Functional constant_value(double c) { return {FunctionalKind::Constant, 1.0, 0, 1, c}; }

  bool uses_beta() const noexcept {
    switch (kind) {
      case FunctionalKind::SmoothMax:
      case FunctionalKind::LogSum:
      case FunctionalKind::Softmax:
      case FunctionalKind::SoftmaxProduct:
      case FunctionalKind::SoftmaxSpread:
        return true;
      default:
        return false;
    }
  }

  bool has_gradient() const noexcept {
    switch (kind) {
      case FunctionalKind::HardMax:
      case FunctionalKind::ReducedMax:
      case FunctionalKind::IndicatorAPlus:
      case FunctionalKind::IndicatorA1:
        return false;
      default:
        return true;
    }
  }

  /// Throws IndexError / InvalidArgument if the functional cannot be
  /// evaluated on vectors of dimension `dim`.
  void validate(std::size_t dim) const {
    auto need = [dim](std::size_t k) {
      if (k >= dim) throw IndexError("functional index " + std::to_string(k + 1) + " exceeds dimension");
    };
    switch (kind) {
      case FunctionalKind::Coordinate:
      case FunctionalKind::Softmax:
      case FunctionalKind::SoftmaxSpread:
        need(i);
        break;
      case FunctionalKind::SoftmaxProduct:
        need(i);
        need(j);
        if (i == j) throw InvalidArgument("softmax product needs distinct indices");
        break;
      default:
        break;
    }
    if (uses_beta() && !(beta > 0.0)) throw InvalidArgument("beta must be positive");
    if (dim < 2 && kind != FunctionalKind::Coordinate && kind != FunctionalKind::SquaredNorm &&
        kind != FunctionalKind::Constant)
      throw InvalidArgument("functional needs at least two coordinates");
  }

  double operator()(std::span<const double> x) const {
    switch (kind) {
      case FunctionalKind::Coordinate:
        return x[i];
      case FunctionalKind::HardMax:
        return smoothmax::hard_max(x).value;
      case FunctionalKind::ReducedMax:
        return smoothmax::reduced_max(x);
      case FunctionalKind::IndicatorAPlus:
        return smoothmax::indicator_a_plus(x);
      case FunctionalKind::IndicatorA1:
        return smoothmax::indicator_a1(x);
      case FunctionalKind::SquaredNorm: {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
      }
      case FunctionalKind::Constant:
        return constant;
      default:
        break;
    }
    std::array<double, kMaxDim> p{};
    const auto s = smoothmax::evaluate_into(x, beta, std::span(p.data(), x.size()));
    switch (kind) {
      case FunctionalKind::SmoothMax:
        return s.q;
      case FunctionalKind::LogSum:
        return s.log_s;
      case FunctionalKind::Softmax:
        return p[i];
      case FunctionalKind::SoftmaxProduct:
        return p[i] * p[j];
      case FunctionalKind::SoftmaxSpread:
        return p[i] * (1.0 - p[i]);
      default:
        return 0.0;
    }
  }

  /// Analytic gradient written into grad (size N).
  void gradient(std::span<const double> x, std::span<double> grad) const {
    const std::size_t n = x.size();
    switch (kind) {
      case FunctionalKind::Coordinate:
        for (std::size_t k = 0; k < n; ++k) grad[k] = k == i ? 1.0 : 0.0;
        return;
      case FunctionalKind::SquaredNorm:
        for (std::size_t k = 0; k < n; ++k) grad[k] = 2.0 * x[k];
        return;
      case FunctionalKind::Constant:
        for (std::size_t k = 0; k < n; ++k) grad[k] = 0.0;
        return;
      default:
        break;
    }
    if (!has_gradient()) throw UnsupportedFunctional(name() + " has no analytic gradient");
    std::array<double, kMaxDim> p{};
    smoothmax::evaluate_into(x, beta, std::span(p.data(), n));
    switch (kind) {
      case FunctionalKind::SmoothMax:
        for (std::size_t k = 0; k < n; ++k) grad[k] = p[k];
        return;
      case FunctionalKind::LogSum:
        for (std::size_t k = 0; k < n; ++k) grad[k] = beta * p[k];
        return;
      case FunctionalKind::Softmax:
        for (std::size_t k = 0; k < n; ++k) grad[k] = beta * p[i] * ((k == i ? 1.0 : 0.0) - p[k]);
        return;
      case FunctionalKind::SoftmaxProduct: {
        // beta p_i p_j (e_i + e_j - 2p)
        const double pp = beta * p[i] * p[j];
        for (std::size_t k = 0; k < n; ++k)
          grad[k] = pp * ((k == i ? 1.0 : 0.0) + (k == j ? 1.0 : 0.0) - 2.0 * p[k]);
        return;
      }
      case FunctionalKind::SoftmaxSpread: {
        const double scale = (1.0 - 2.0 * p[i]) * beta * p[i];
        for (std::size_t k = 0; k < n; ++k) grad[k] = scale * ((k == i ? 1.0 : 0.0) - p[k]);
        return;
      }
      default:
        return;
    }
  }

  /// Textual form, e.g. "pp:1,2"; indices one-based.
  std::string name() const {
    auto one = [](std::size_t k) { return std::to_string(k + 1); };
    switch (kind) {
      case FunctionalKind::Coordinate: return "x:" + one(i);
      case FunctionalKind::SmoothMax: return "smooth-max";
      case FunctionalKind::LogSum: return "log-sum";
      case FunctionalKind::Softmax: return "p:" + one(i);
      case FunctionalKind::SoftmaxProduct: return "pp:" + one(i) + "," + one(j);
      case FunctionalKind::SoftmaxSpread: return "p-spread:" + one(i);
      case FunctionalKind::HardMax: return "max";
      case FunctionalKind::ReducedMax: return "reduced-max";
      case FunctionalKind::IndicatorAPlus: return "a-plus";
      case FunctionalKind::IndicatorA1: return "a1";
      case FunctionalKind::SquaredNorm: return "sqnorm";
      case FunctionalKind::Constant: {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, constant);
        return "const:" + std::string(buf, res.ptr);
      }
    }
    return "?";
  }

  bool operator==(const Functional&) const = default;
};

/// Parses the textual form produced by Functional::name(). `beta` is attached
/// to the functionals that depend on it.
inline Functional parse_functional(std::string_view text, double beta = 1.0) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto index = [&](std::string_view s) -> std::size_t {
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v == 0)
      throw InvalidArgument("bad index '" + std::string(s) + "' in functional '" + std::string(text) + "'");
    return v - 1;
  };
  auto require_arg = [&] {
    if (arg.empty()) throw InvalidArgument("functional '" + std::string(text) + "' needs an argument");
  };
  if (head == "x") return require_arg(), Functional::coordinate(index(arg));
  if (head == "smooth-max") return Functional::smooth_max(beta);
  if (head == "log-sum") return Functional::log_sum(beta);
  if (head == "p") return require_arg(), Functional::softmax(beta, index(arg));
  if (head == "p-spread") return require_arg(), Functional::softmax_spread(beta, index(arg));
  if (head == "pp") {
    require_arg();
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) throw InvalidArgument("pp needs two indices, e.g. pp:1,2");
    return Functional::softmax_product(beta, index(arg.substr(0, comma)), index(arg.substr(comma + 1)));
  }
  if (head == "max") return Functional::hard_max();
  if (head == "reduced-max") return Functional::reduced_max();
  if (head == "a-plus") return Functional::indicator_a_plus();
  if (head == "a1") return Functional::indicator_a1();
  if (head == "sqnorm") return Functional::squared_norm();
  if (head == "const") {
    require_arg();
    double c = 0.0;
    auto res = std::from_chars(arg.data(), arg.data() + arg.size(), c);
    if (res.ec != std::errc{} || res.ptr != arg.data() + arg.size())
      throw InvalidArgument("bad constant in functional '" + std::string(text) + "'");
    return Functional::constant_value(c);
  }
  throw InvalidArgument("unknown functional '" + std::string(text) + "'");
}

}  // namespace gcmax
