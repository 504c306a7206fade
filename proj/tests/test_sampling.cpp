#include <gtest/gtest.h>

#include <cmath>

#include "gcmax/estimators.hpp"
#include "gcmax/sampling.hpp"

using namespace gcmax;

namespace {

std::vector<double> column(const SampleBatch& b, std::size_t c) {
  std::vector<double> out(b.count);
  for (std::size_t r = 0; r < b.count; ++r) out[r] = b.row(r)[c];
  return out;
}

std::vector<double> column(const std::vector<double>& data, std::size_t dim, std::size_t c) {
  std::vector<double> out(data.size() / dim);
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = data[r * dim + c];
  return out;
}

// Standard error of the sample correlation under bivariate normality.
double corr_se(double rho, std::size_t n) { return (1.0 - rho * rho) / std::sqrt(static_cast<double>(n)); }

double sample_corr(std::span<const double> a, std::span<const double> b) {
  const auto c = stats::covariance_estimate(a, b).value;
  return c / std::sqrt(stats::variance(a) * stats::variance(b));
}

}  // namespace

TEST(Sample, IdentityColumnVariances) {
  const std::size_t n = 1'000'000;
  const auto batch = sample(identity_spec(2), n, 42);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto col = column(batch, c);
    EXPECT_NEAR(stats::variance(col), 1.0, 4.0 * std::sqrt(2.0 / n));
  }
}

TEST(Sample, PairCorrelation) {
  const std::size_t n = 1'000'000;
  const auto batch = sample(pair_correlated_spec(3, 0.5), n, 7);
  EXPECT_NEAR(sample_corr(column(batch, 0), column(batch, 1)), 0.5, 4.0 * corr_se(0.5, n));
  EXPECT_NEAR(sample_corr(column(batch, 0), column(batch, 2)), 0.0, 4.0 * corr_se(0.0, n));
}

TEST(Sample, SingleRowIsFinite) {
  const auto batch = sample(make_correlation(4, {OffDiagonal{0, 3, -0.3}}), 1, 5);
  ASSERT_EQ(batch.count, 1u);
  for (double v : batch.row(0)) EXPECT_TRUE(std::isfinite(v));
  EXPECT_THROW(sample(identity_spec(2), 0, 5), InvalidArgument);
}

TEST(Sample, DeterministicAcrossThreadCounts) {
  const auto spec = make_correlation(5, {OffDiagonal{0, 1, 0.4}, OffDiagonal{2, 4, 0.2}});
  set_thread_count(1);
  const auto a = sample(spec, 50'000, 99);
  set_thread_count(4);
  const auto b = sample(spec, 50'000, 99);
  set_thread_count(0);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.spec_hash, spec.hash());
  const auto c = sample(spec, 50'000, 100);
  EXPECT_NE(a.data, c.data);
}

TEST(Sample, PrefixStableWhenCountGrows) {
  // Chunked streams: the first rows do not depend on the total count.
  const auto spec = identity_spec(3);
  const auto small = sample(spec, 5000, 3);
  const auto large = sample(spec, 20000, 3);
  EXPECT_TRUE(std::equal(small.data.begin(), small.data.end(), large.data.begin()));
}

TEST(SampleCoupled, FullCouplingIsBitIdentical) {
  const auto batch = sample_coupled(pair_correlated_spec(3, 0.3), 1.0, 10'000, 17);
  EXPECT_EQ(batch.g_data, batch.h_data);
}

TEST(SampleCoupled, ZeroCouplingIsIndependent) {
  const std::size_t n = 1'000'000;
  const auto batch = sample_coupled(identity_spec(3), 0.0, n, 23);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const auto est = stats::covariance_estimate(column(batch.g_data, 3, i), column(batch.h_data, 3, j));
      EXPECT_TRUE(est.contains(0.0)) << i << "," << j << " cov=" << est.value;
    }
}

TEST(SampleCoupled, HalfCouplingCrossCovariance) {
  // Block entry b * c_11 = 0.5: Cov(G_1, H_1) = E[xi (b xi + sqrt(1-b^2) eta)] = b.
  const std::size_t n = 1'000'000;
  const auto batch = sample_coupled(identity_spec(2), 0.5, n, 29);
  const auto est = stats::covariance_estimate(column(batch.g_data, 2, 0), column(batch.h_data, 2, 0));
  EXPECT_TRUE(est.contains(0.5)) << est.value;
}

TEST(SampleCoupled, MarginalsMatchPlainSampling) {
  const auto spec = pair_correlated_spec(3, 0.5);
  const auto plain = sample(spec, 10'000, 31);
  const auto coupled = sample_coupled(spec, 0.3, 10'000, 31);
  EXPECT_EQ(plain.data, coupled.g_data);
  // H has the same law; check its moments statistically.
  const std::size_t n = 1'000'000;
  const auto big = sample_coupled(spec, 0.3, n, 37);
  const auto h0 = column(big.h_data, 3, 0), h1 = column(big.h_data, 3, 1);
  EXPECT_NEAR(stats::variance(h0), 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sample_corr(h0, h1), 0.5, 4.0 * corr_se(0.5, n));
}

TEST(Sample, RotationIdentityUnderInterpolatedFamily) {
  // z+ = (z1+z2)/sqrt2 and z- = (z1-z2)/sqrt2 have variances 1 +/- theta*rho
  // and are uncorrelated.
  const std::size_t n = 1'000'000;
  const double rho = 0.6, theta = 0.5;
  const auto spec = interpolate_sigma(identity_spec(3), pair_correlated_spec(3, rho), theta);
  const auto batch = sample(spec, n, 41);
  std::vector<double> plus(n), minus(n);
  for (std::size_t r = 0; r < n; ++r) {
    plus[r] = (batch.row(r)[0] + batch.row(r)[1]) / std::sqrt(2.0);
    minus[r] = (batch.row(r)[0] - batch.row(r)[1]) / std::sqrt(2.0);
  }
  EXPECT_TRUE(stats::variance_estimate(plus).contains(1.0 + theta * rho));
  EXPECT_TRUE(stats::variance_estimate(minus).contains(1.0 - theta * rho));
  EXPECT_TRUE(stats::covariance_estimate(plus, minus).contains(0.0));
}
