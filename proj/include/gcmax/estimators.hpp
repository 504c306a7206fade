#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gcmax/correlation.hpp"
#include "gcmax/error.hpp"
#include "gcmax/quadrature.hpp"
#include "gcmax/sampling.hpp"

namespace gcmax {

/// Default half-width of every interval, in standard errors.
inline constexpr double kConfidenceZ = 4.0;
/// Minimum sample count accepted by the Monte Carlo estimators.
inline constexpr std::size_t kMinSamples = 100;
/// Replicate blocks used for the standard error of paired variance differences.
inline constexpr std::size_t kVarDiffReplicates = 50;

/// Monte Carlo point estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double confidence_z = kConfidenceZ;

  double lower() const noexcept { return value - confidence_z * std_error; }
  double upper() const noexcept { return value + confidence_z * std_error; }
  bool contains(double x) const noexcept { return lower() <= x && x <= upper(); }

  bool operator==(const Estimate&) const = default;
};

/// Estimate of a difference between two arms driven by the same noise.
struct PairedEstimate {
  double diff_value = 0.0;
  double diff_std_error = 0.0;
  std::size_t n = 0;
  std::size_t replicates = 0;

  Estimate as_estimate(double z = kConfidenceZ) const { return {diff_value, diff_std_error, n, z}; }
};

/// a - b with independent errors combined in quadrature.
inline Estimate difference(const Estimate& a, const Estimate& b) {
  return {a.value - b.value, std::hypot(a.std_error, b.std_error), std::min(a.n, b.n), a.confidence_z};
}

namespace stats {

/// Compensated (Neumaier) summation; the result depends only on input order.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double sum(std::span<const double> x) noexcept {
  CompensatedSum s;
  for (double v : x) s.add(v);
  return s.value();
}

inline double mean(std::span<const double> x) noexcept { return sum(x) / static_cast<double>(x.size()); }

/// Unbiased sample variance (two-pass).
inline double variance(std::span<const double> x) noexcept {
  const double m = mean(x);
  CompensatedSum s;
  for (double v : x) s.add((v - m) * (v - m));
  return s.value() / static_cast<double>(x.size() - 1);
}

inline Estimate mean_estimate(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  return {mean(x), std::sqrt(variance(x) / n), x.size()};
}

/// Unbiased variance with delta-method error sqrt((m4 - m2^2) / n).
inline Estimate variance_estimate(std::span<const double> x) {
  const double m = mean(x);
  CompensatedSum s2, s4;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    s2.add(d2);
    s4.add(d2 * d2);
  }
  const double n = static_cast<double>(x.size());
  const double m2 = s2.value() / n;
  const double m4 = s4.value() / n;
  return {s2.value() / (n - 1.0), std::sqrt(std::max(0.0, m4 - m2 * m2) / n), x.size()};
}

/// Unbiased covariance with plug-in error sqrt((E[dx^2 dy^2] - c^2) / n).
inline Estimate covariance_estimate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimMismatch("covariance inputs differ in length");
  const double mx = mean(x), my = mean(y);
  CompensatedSum c, c2;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double prod = (x[k] - mx) * (y[k] - my);
    c.add(prod);
    c2.add(prod * prod);
  }
  const double n = static_cast<double>(x.size());
  const double plug = c.value() / n;
  return {c.value() / (n - 1.0), std::sqrt(std::max(0.0, c2.value() / n - plug * plug) / n), x.size()};
}

/// Point value with standard error sd(influence) / sqrt(n).
inline Estimate influence_estimate(double value, std::span<const double> influence) {
  const double n = static_cast<double>(influence.size());
  return {value, std::sqrt(variance(influence) / n), influence.size()};
}

}  // namespace stats

/// n x cols table of per-draw functional values, column-major.
class ValueTable {
 public:
  ValueTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> column(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
  double& at(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

namespace detail {

inline void require_samples(std::size_t n) {
  if (n < kMinSamples) throw InvalidArgument("Monte Carlo estimates need at least " +
                                             std::to_string(kMinSamples) + " samples");
}

inline void store_row(ValueTable& table, std::size_t row, std::span<const double> out) {
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (!std::isfinite(out[c]))
      throw NonFinite("non-finite functional value at draw " + std::to_string(row));
    table.at(row, c) = out[c];
  }
}

}  // namespace detail

/// Evaluates map(row, out) on n draws of Normal(0, spec); out has `cols` slots.
template <class RowMap>
ValueTable evaluate(const CorrelationSpec& spec, std::size_t n, std::uint64_t seed, std::size_t cols,
                    RowMap&& map) {
  ValueTable table(n, cols);
  const std::size_t d = spec.dim();
  for_each_chunk(spec, n, seed, [&](std::size_t first, std::size_t rows, std::span<const double> z) {
    std::vector<double> out(cols);
    for (std::size_t r = 0; r < rows; ++r) {
      map(z.subspan(r * d, d), std::span<double>(out));
      detail::store_row(table, first + r, out);
    }
  });
  return table;
}

/// map(x_row, y_row, out) on common-random-number pairs X = Lx xi, Y = Ly xi.
template <class RowMap>
ValueTable evaluate_paired(const CorrelationSpec& spec_x, const CorrelationSpec& spec_y, std::size_t n,
                           std::uint64_t seed, std::size_t cols, RowMap&& map) {
  ValueTable table(n, cols);
  const std::size_t d = spec_x.dim();
  for_each_paired_chunk(spec_x, spec_y, n, seed,
                        [&](std::size_t first, std::size_t rows, std::span<const double> x,
                            std::span<const double> y) {
                          std::vector<double> out(cols);
                          for (std::size_t r = 0; r < rows; ++r) {
                            map(x.subspan(r * d, d), y.subspan(r * d, d), std::span<double>(out));
                            detail::store_row(table, first + r, out);
                          }
                        });
  return table;
}

/// map(g_row, h_row, out) on the coupled pair (G_b, H_b).
template <class RowMap>
ValueTable evaluate_coupled(const CorrelationSpec& spec, double b, std::size_t n, std::uint64_t seed,
                            std::size_t cols, RowMap&& map) {
  ValueTable table(n, cols);
  const std::size_t d = spec.dim();
  for_each_coupled_chunk(spec, b, n, seed,
                         [&](std::size_t first, std::size_t rows, std::span<const double> g,
                             std::span<const double> h) {
                           std::vector<double> out(cols);
                           for (std::size_t r = 0; r < rows; ++r) {
                             map(g.subspan(r * d, d), h.subspan(r * d, d), std::span<double>(out));
                             detail::store_row(table, first + r, out);
                           }
                         });
  return table;
}

/// E[f(Z)], Z ~ Normal(0, spec).
template <class F>
Estimate mc_mean(F&& f, const CorrelationSpec& spec, std::size_t n, std::uint64_t seed) {
  detail::require_samples(n);
  auto t = evaluate(spec, n, seed, 1, [&](std::span<const double> z, std::span<double> out) { out[0] = f(z); });
  return stats::mean_estimate(t.column(0));
}

/// Var(f(Z)) with a delta-method standard error.
template <class F>
Estimate mc_var(F&& f, const CorrelationSpec& spec, std::size_t n, std::uint64_t seed) {
  detail::require_samples(n);
  auto t = evaluate(spec, n, seed, 1, [&](std::span<const double> z, std::span<double> out) { out[0] = f(z); });
  return stats::variance_estimate(t.column(0));
}

/// Cov(f(Z), g(Z)) on a single batch.
template <class F, class G>
Estimate mc_cov(F&& f, G&& g, const CorrelationSpec& spec, std::size_t n, std::uint64_t seed) {
  detail::require_samples(n);
  auto t = evaluate(spec, n, seed, 2, [&](std::span<const double> z, std::span<double> out) {
    out[0] = f(z);
    out[1] = g(z);
  });
  return stats::covariance_estimate(t.column(0), t.column(1));
}

/// Var(f(column 1)) - Var(f(column 0)) of a two-column table; standard error
/// from K contiguous replicate blocks.
inline PairedEstimate replicated_var_diff(const ValueTable& t, std::size_t replicates = kVarDiffReplicates) {
  const std::size_t n = t.rows();
  if (replicates < 2 || n < 2 * replicates) throw InvalidArgument("too few samples for replicate blocks");
  auto fx = t.column(0), fy = t.column(1);
  const double full = stats::variance(fy) - stats::variance(fx);
  std::vector<double> block(replicates);
  const std::size_t size = n / replicates;
  for (std::size_t k = 0; k < replicates; ++k) {
    const std::size_t first = k * size;
    const std::size_t len = k + 1 == replicates ? n - first : size;
    block[k] = stats::variance(fy.subspan(first, len)) - stats::variance(fx.subspan(first, len));
  }
  const double se = std::sqrt(stats::variance(block) / static_cast<double>(replicates));
  return {full, se, n, replicates};
}

/// Var(f(Y)) - Var(f(X)) with X and Y driven by the same standard-normal noise.
template <class F>
PairedEstimate paired_var_diff(F&& f, const CorrelationSpec& spec_x, const CorrelationSpec& spec_y,
                               std::size_t n, std::uint64_t seed,
                               std::size_t replicates = kVarDiffReplicates) {
  if (spec_x.dim() != spec_y.dim()) throw DimMismatch("paired specs must share a dimension");
  detail::require_samples(n);
  auto t = evaluate_paired(spec_x, spec_y, n, seed, 2,
                           [&](std::span<const double> x, std::span<const double> y, std::span<double> out) {
                             out[0] = f(x);
                             out[1] = f(y);
                           });
  return replicated_var_diff(t, replicates);
}

/// Var(f(Y)) - Var(f(X)) from two independent batches (no common noise).
template <class F>
Estimate unpaired_var_diff(F&& f, const CorrelationSpec& spec_x, const CorrelationSpec& spec_y, std::size_t n,
                           std::uint64_t seed) {
  if (spec_x.dim() != spec_y.dim()) throw DimMismatch("specs must share a dimension");
  const Estimate vx = mc_var(f, spec_x, n, derive_seed(seed, 1));
  const Estimate vy = mc_var(f, spec_y, n, derive_seed(seed, 2));
  return difference(vy, vx);
}

inline double normal_pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct MaxMoments {
  double mean;
  double second_moment;
  double variance;
};

/// Moments of the maximum of n i.i.d. standard normals from the density
/// n phi(x) Phi(x)^(n-1), integrated adaptively over [-10, 10]. The tails
/// beyond |x| = 10 contribute less than 1e-20.
inline MaxMoments max_moments_oracle(std::size_t n) {
  if (n < 1) throw InvalidArgument("dimension must be at least 1");
  const double nn = static_cast<double>(n);
  auto density = [nn](double x) { return nn * normal_pdf(x) * std::pow(normal_cdf(x), nn - 1.0); };
  const double m1 = integrate_adaptive([&](double x) { return x * density(x); }, -10.0, 0.0) +
                    integrate_adaptive([&](double x) { return x * density(x); }, 0.0, 10.0);
  const double m2 = integrate_adaptive([&](double x) { return x * x * density(x); }, -10.0, 0.0) +
                    integrate_adaptive([&](double x) { return x * x * density(x); }, 0.0, 10.0);
  return {m1, m2, m2 - m1 * m1};
}

inline double var_max_oracle(std::size_t n) { return max_moments_oracle(n).variance; }

inline double sech2_integrand(double w) noexcept {
  const double c = 2.0 * std::cosh(w / std::numbers::sqrt2);
  return 1.0 / (c * c);
}

/// Integral of (2 cosh(w / sqrt 2))^-2 over [-40, 40]; the tails beyond are
/// below 1e-20.
inline double sech2_integral() {
  return integrate_adaptive(sech2_integrand, -40.0, 0.0) + integrate_adaptive(sech2_integrand, 0.0, 40.0);
}

}  // namespace gcmax
