#include <gtest/gtest.h>

#include <random>

#include "gcmax/correlation.hpp"

using namespace gcmax;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(MakeCorrelation, EmptyListIsIdentity) {
  const auto spec = make_correlation(3);
  EXPECT_EQ(spec.entries(), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(spec.has_unit_diagonal());
  EXPECT_EQ(spec.psd_jitter_used(), 0.0);
}

TEST(MakeCorrelation, PairCorrelatedFamily) {
  const auto spec = make_correlation(3, {OffDiagonal{0, 1, 0.5}});
  EXPECT_EQ(spec(0, 1), 0.5);
  EXPECT_EQ(spec(1, 0), 0.5);
  EXPECT_EQ(spec(0, 2), 0.0);
  EXPECT_EQ(spec(1, 2), 0.0);
  EXPECT_TRUE(spec.has_unit_diagonal());
}

TEST(MakeCorrelation, RejectsCorrelationAboveOne) {
  EXPECT_THROW(make_correlation(2, {OffDiagonal{0, 1, 1.0001}}), NotPsd);
}

TEST(MakeCorrelation, RejectsIndefiniteMatrix) {
  // Pairwise 0.9 / 0.9 / -0.9 is not a valid correlation matrix.
  EXPECT_THROW(make_correlation(3, {OffDiagonal{0, 1, 0.9}, OffDiagonal{0, 2, 0.9}, OffDiagonal{1, 2, -0.9}}),
               NotPsd);
}

TEST(MakeCorrelation, RejectsBadIndices) {
  EXPECT_THROW(make_correlation(3, {OffDiagonal{0, 3, 0.1}}), IndexError);
  EXPECT_THROW(make_correlation(3, {OffDiagonal{1, 1, 0.1}}), IndexError);
  EXPECT_THROW(make_correlation(1), InvalidArgument);
  EXPECT_THROW(make_correlation(kMaxDim + 1), InvalidArgument);
}

TEST(MakeCorrelation, SingularMatrixUsesOneJitterPass) {
  const auto spec = make_correlation(2, {OffDiagonal{0, 1, 1.0}});
  EXPECT_EQ(spec.psd_jitter_used(), kPsdJitter);
  const Eigen::MatrixXd rebuilt = spec.factor() * spec.factor().transpose();
  EXPECT_LE(max_abs(rebuilt - spec.entries()), kFactorTolerance);
}

TEST(CorrelationSpec, FactorRoundTripOnRandomGramMatrices) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 9;
    Eigen::MatrixXd v(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) v(a, b) = normal(rng);
    for (int a = 0; a < n; ++a) v.row(a).normalize();
    const auto spec = CorrelationSpec::from_matrix(v * v.transpose());
    const Eigen::MatrixXd l = spec.factor();
    EXPECT_LE(max_abs(l * l.transpose() - spec.entries()), kFactorTolerance);
    EXPECT_TRUE(l.isLowerTriangular());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) EXPECT_EQ(spec(a, b), spec(b, a));
  }
}

TEST(CorrelationSpec, EigenFallbackHandlesRankDeficientMatrices) {
  // All-ones is rank one; it must factor under the fallback policy.
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
  const auto spec = CorrelationSpec::from_matrix(ones, FactorPolicy::AllowEigenFallback);
  const Eigen::MatrixXd l = spec.factor();
  EXPECT_TRUE(l.isLowerTriangular());
  EXPECT_LE(max_abs(l * l.transpose() - ones), kFactorTolerance);
}

TEST(CorrelationSpec, HashDependsOnEntries) {
  EXPECT_EQ(make_correlation(3).hash(), identity_spec(3).hash());
  EXPECT_NE(make_correlation(3).hash(), pair_correlated_spec(3, 0.5).hash());
}

TEST(InterpolateSigma, ConvexCombination) {
  const auto x = identity_spec(3);
  const auto y = pair_correlated_spec(3, 0.6);
  const auto mid = interpolate_sigma(x, y, 0.5);
  EXPECT_DOUBLE_EQ(mid(0, 1), 0.3);
  EXPECT_EQ(mid(0, 2), 0.0);
  EXPECT_EQ(mid(1, 2), 0.0);
  EXPECT_TRUE(mid.has_unit_diagonal());
}

TEST(InterpolateSigma, EndpointsAndFixedPoint) {
  const auto x = identity_spec(4);
  const auto y = make_correlation(4, {OffDiagonal{0, 1, 0.5}, OffDiagonal{2, 3, 0.25}});
  EXPECT_EQ(interpolate_sigma(x, y, 0.0), x);
  EXPECT_EQ(interpolate_sigma(x, y, 1.0), y);
  for (double theta : {0.1, 0.37, 0.9}) EXPECT_EQ(interpolate_sigma(y, y, theta), y);
}

TEST(InterpolateSigma, Errors) {
  EXPECT_THROW(interpolate_sigma(identity_spec(3), identity_spec(4), 0.5), DimMismatch);
  EXPECT_THROW(interpolate_sigma(identity_spec(3), identity_spec(3), 1.5), InvalidArgument);
}

TEST(ScaledSpecs, DiagonalCovarianceAndScaling) {
  const std::vector<double> variances{0.25, 1.0, 1.0};
  const auto spec = make_diagonal_covariance(variances);
  EXPECT_EQ(spec(0, 0), 0.25);
  EXPECT_FALSE(spec.has_unit_diagonal());
  const std::vector<double> sd{0.5, 1.0, 1.0};
  const auto scaled = scale_variances(pair_correlated_spec(3, 0.4), sd);
  EXPECT_DOUBLE_EQ(scaled(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(scaled(0, 1), 0.2);
}
