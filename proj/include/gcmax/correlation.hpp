#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "gcmax/error.hpp"

namespace gcmax {

/// Largest supported dimension.
inline constexpr std::size_t kMaxDim = 64;
/// Most negative eigenvalue tolerated before a matrix is rejected.
inline constexpr double kPsdTolerance = 1e-12;
/// Diagonal shift applied once when a plain Cholesky factorization fails.
inline constexpr double kPsdJitter = 1e-12;
/// Maximum entrywise error of factor * factor^T against the (jittered) entries.
inline constexpr double kFactorTolerance = 1e-10;

enum class FactorPolicy {
  /// Pivot-free Cholesky, one jitter pass, then NotPsd.
  Cholesky,
  /// As Cholesky, then an eigen-decomposition square root re-triangularised
  /// by QR. Used for boundary matrices produced by projection.
  AllowEigenFallback,
};

/// Zero-based off-diagonal entry (i, j) with i != j.
struct OffDiagonal {
  std::size_t i;
  std::size_t j;
  double value;
};

/// A validated symmetric positive semi-definite covariance matrix together
/// with a cached lower-triangular factor L (L L^T = entries). In the usual
/// case the diagonal is all ones and the matrix is a correlation matrix.
/// Immutable after construction.
class CorrelationSpec {
 public:
  static CorrelationSpec from_matrix(const Eigen::MatrixXd& m,
                                     FactorPolicy policy = FactorPolicy::Cholesky) {
    return CorrelationSpec(m, policy);
  }

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  double psd_jitter_used() const noexcept { return jitter_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  std::uint64_t hash() const noexcept { return hash_; }

  bool has_unit_diagonal() const noexcept {
    for (std::size_t i = 0; i < dim_; ++i)
      if (entries_(i, i) != 1.0) return false;
    return true;
  }

  /// Row i of the factor, entries 0..i (row-major packed lower triangle).
  std::span<const double> factor_row(std::size_t i) const noexcept {
    return {packed_.data() + i * (i + 1) / 2, i + 1};
  }

  /// z = L xi.
  void correlate(std::span<const double> xi, std::span<double> z) const noexcept {
    const double* row = packed_.data();
    for (std::size_t i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k <= i; ++k) acc += row[k] * xi[k];
      z[i] = acc;
      row += i + 1;
    }
  }

  bool operator==(const CorrelationSpec& other) const {
    return dim_ == other.dim_ && entries_ == other.entries_;
  }

 private:
  CorrelationSpec(const Eigen::MatrixXd& m, FactorPolicy policy) {
    if (m.rows() != m.cols()) throw DimMismatch("correlation matrix must be square");
    dim_ = static_cast<std::size_t>(m.rows());
    if (dim_ < 1 || dim_ > kMaxDim)
      throw InvalidArgument("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (!m.allFinite()) throw InvalidArgument("matrix entries must be finite");

    entries_ = m;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!(m(i, i) > 0.0)) throw NotPsd("diagonal entries must be positive");
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(m(i, j) - m(j, i)) > 1e-12) throw InvalidArgument("matrix is not symmetric");
        entries_(j, i) = entries_(i, j);
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(entries_, Eigen::EigenvaluesOnly);
    min_eigenvalue_ = eig.eigenvalues().minCoeff();
    if (min_eigenvalue_ < -kPsdTolerance)
      throw NotPsd("matrix is not positive semi-definite (min eigenvalue " +
                   std::to_string(min_eigenvalue_) + ")");

    factorize(policy);
    pack();
    hash_ = compute_hash();
  }

  void factorize(FactorPolicy policy) {
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::LLT<Eigen::MatrixXd> llt(entries_);
    if (llt.info() == Eigen::Success && factor_ok(llt.matrixL(), 0.0)) {
      factor_ = llt.matrixL();
      return;
    }
    Eigen::MatrixXd shifted = entries_ + kPsdJitter * Eigen::MatrixXd::Identity(n, n);
    llt.compute(shifted);
    if (llt.info() == Eigen::Success && factor_ok(llt.matrixL(), kPsdJitter)) {
      factor_ = llt.matrixL();
      jitter_ = kPsdJitter;
      return;
    }
    if (policy != FactorPolicy::AllowEigenFallback)
      throw NotPsd("Cholesky factorization failed after jitter");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(entries_);
    Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd b = eig.eigenvectors() * root.asDiagonal();
    // b b^T = entries; QR of b^T gives b = R^T Q^T, so R^T R = entries.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b.transpose());
    Eigen::MatrixXd lower = qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix().transpose();
    for (Eigen::Index k = 0; k < n; ++k)
      if (lower(k, k) < 0.0) lower.col(k) = -lower.col(k);
    if (!factor_ok(lower, 0.0)) throw NotPsd("eigen-decomposition fallback failed");
    factor_ = lower;
  }

  template <class L>
  bool factor_ok(const L& lower, double jitter) const {
    Eigen::MatrixXd dense = lower;
    if (!dense.allFinite()) return false;
    Eigen::MatrixXd rebuilt = dense * dense.transpose();
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd target = entries_ + jitter * Eigen::MatrixXd::Identity(n, n);
    return (rebuilt - target).cwiseAbs().maxCoeff() <= kFactorTolerance;
  }

  void pack() {
    packed_.clear();
    packed_.reserve(dim_ * (dim_ + 1) / 2);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t k = 0; k <= i; ++k) packed_.push_back(factor_(i, k));
  }

  std::uint64_t compute_hash() const noexcept {
    // FNV-1a over the dimension and the row-major entries.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](const void* data, std::size_t len) {
      const auto* bytes = static_cast<const unsigned char*>(data);
      for (std::size_t k = 0; k < len; ++k) {
        h ^= bytes[k];
        h *= 0x100000001B3ULL;
      }
    };
    const std::uint64_t d = dim_;
    mix(&d, sizeof d);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) {
        const double v = entries_(i, j);
        mix(&v, sizeof v);
      }
    return h;
  }

  std::size_t dim_ = 0;
  Eigen::MatrixXd entries_;
  Eigen::MatrixXd factor_;
  std::vector<double> packed_;
  double jitter_ = 0.0;
  double min_eigenvalue_ = 0.0;
  std::uint64_t hash_ = 0;
};

/// Unit-diagonal correlation matrix of dimension `dim` with the listed
/// off-diagonal entries (zero-based indices, mirrored).
inline CorrelationSpec make_correlation(std::size_t dim, std::span<const OffDiagonal> entries = {}) {
  if (dim < 2) throw InvalidArgument("dimension must be at least 2");
  if (dim > kMaxDim) throw InvalidArgument("dimension must be at most " + std::to_string(kMaxDim));
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (const auto& e : entries) {
    if (e.i >= dim || e.j >= dim || e.i == e.j)
      throw IndexError("invalid off-diagonal index (" + std::to_string(e.i) + ", " +
                       std::to_string(e.j) + ") for dimension " + std::to_string(dim));
    if (!std::isfinite(e.value)) throw InvalidArgument("correlation must be finite");
    if (std::abs(e.value) > 1.0) throw NotPsd("correlation " + std::to_string(e.value) + " outside [-1, 1]");
    m(e.i, e.j) = m(e.j, e.i) = e.value;
  }
  return CorrelationSpec::from_matrix(m);
}

inline CorrelationSpec make_correlation(std::size_t dim, std::initializer_list<OffDiagonal> entries) {
  return make_correlation(dim, std::span<const OffDiagonal>(entries.begin(), entries.size()));
}

inline CorrelationSpec identity_spec(std::size_t dim) { return make_correlation(dim); }

/// The one-parameter family with only coordinates 0 and 1 correlated.
inline CorrelationSpec pair_correlated_spec(std::size_t dim, double rho) {
  return make_correlation(dim, {OffDiagonal{0, 1, rho}});
}

/// Independent coordinates with the given variances.
inline CorrelationSpec make_diagonal_covariance(std::span<const double> variances) {
  const auto n = static_cast<Eigen::Index>(variances.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(variances[i] > 0.0) || !std::isfinite(variances[i]))
      throw InvalidArgument("variances must be positive and finite");
    m(i, i) = variances[i];
  }
  return CorrelationSpec::from_matrix(m);
}

/// Rescales coordinate i by std_devs[i]: entries become s_i s_j sigma_ij.
inline CorrelationSpec scale_variances(const CorrelationSpec& spec, std::span<const double> std_devs) {
  if (std_devs.size() != spec.dim()) throw DimMismatch("std_devs length must equal dimension");
  Eigen::Map<const Eigen::VectorXd> s(std_devs.data(), static_cast<Eigen::Index>(std_devs.size()));
  if (!(s.array() > 0.0).all()) throw InvalidArgument("standard deviations must be positive");
  return CorrelationSpec::from_matrix(s.asDiagonal() * spec.entries() * s.asDiagonal());
}

/// Entrywise (1 - theta) X + theta Y. Endpoints return the inputs exactly.
inline CorrelationSpec interpolate_sigma(const CorrelationSpec& x, const CorrelationSpec& y, double theta) {
  if (x.dim() != y.dim()) throw DimMismatch("interpolated specs must share a dimension");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  if (theta == 0.0) return x;
  if (theta == 1.0) return y;
  Eigen::MatrixXd m = (1.0 - theta) * x.entries() + theta * y.entries();
  // Keep the diagonal exact when both ends share it.
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (x.entries()(i, i) == y.entries()(i, i)) m(i, i) = x.entries()(i, i);
  return CorrelationSpec::from_matrix(m);
}

}  // namespace gcmax
