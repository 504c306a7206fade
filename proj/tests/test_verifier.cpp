#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gcmax/quadrature.hpp"
#include "gcmax/verifier.hpp"

using namespace gcmax;
using namespace gcmax::verify;

namespace {

std::string failure_detail(const CheckReport& r) {
  return r.check_id + " verdict " + std::string(to_string(r.verdict)) + ": " + format_double(r.estimate.value) +
         " +/- " + format_double(r.estimate.std_error) + " target " + to_string(r.target);
}

void expect_pass(const CheckReport& r) { EXPECT_EQ(r.verdict, Verdict::Pass) << failure_detail(r); }

void expect_all_pass(const std::vector<CheckReport>& rs) {
  for (const auto& r : rs) expect_pass(r);
}

}  // namespace

TEST(Judge, ThreeValuedSignVerdicts) {
  const Estimate clear_neg{-1.0, 0.1, 100}, straddle{0.1, 0.1, 100}, clear_pos{1.0, 0.1, 100};
  EXPECT_EQ(judge(clear_neg, Target::less_equal(0.0)), Verdict::Pass);
  EXPECT_EQ(judge(straddle, Target::less_equal(0.0)), Verdict::Indeterminate);
  EXPECT_EQ(judge(clear_pos, Target::less_equal(0.0)), Verdict::Fail);
  EXPECT_EQ(judge(clear_pos, Target::greater_equal(0.0)), Verdict::Pass);
  EXPECT_EQ(judge(straddle, Target::greater_equal(0.0)), Verdict::Indeterminate);
  EXPECT_EQ(judge(clear_neg, Target::greater_equal(0.0)), Verdict::Fail);
  EXPECT_EQ(judge(straddle, Target::at_most(0.0)), Verdict::Pass);
  EXPECT_EQ(judge(clear_pos, Target::at_most(0.0)), Verdict::Fail);
  EXPECT_EQ(judge(straddle, Target::equal(0.0)), Verdict::Pass);
  EXPECT_EQ(judge(clear_pos, Target::equal(0.0)), Verdict::Fail);
  EXPECT_EQ(judge(clear_pos, Target::equal(0.0, 2.0)), Verdict::Pass);
  EXPECT_EQ(judge(clear_pos, Target::none()), Verdict::Pass);
  EXPECT_EQ(judge(straddle, Target::less(0.3)), Verdict::Fail);
  EXPECT_EQ(judge(straddle, Target::less(0.6)), Verdict::Pass);
}

TEST(Judge, OverallVerdict) {
  std::vector<CheckReport> rs(3);
  EXPECT_EQ(overall_verdict(rs), Verdict::Pass);
  rs[1].verdict = Verdict::Indeterminate;
  EXPECT_EQ(overall_verdict(rs), Verdict::Indeterminate);
  rs[2].verdict = Verdict::Fail;
  EXPECT_EQ(overall_verdict(rs), Verdict::Fail);
}

TEST(IConstant, ClosedForm) {
  EXPECT_DOUBLE_EQ(i_constant(0.0, 0.3), 0.5 / std::sqrt(std::numbers::pi));
  EXPECT_NEAR(i_constant(0.5, 1.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_THROW(i_constant(1.0, 1.0), RhoOutOfRange);
}

TEST(IConstant, ThetaIntegralOfDensity) {
  // int_0^1 (2 pi (1 - theta rho))^(-1/2) dtheta = 2 / (sqrt(2 pi) (1 + sqrt(1 - rho))), frozen at rho = 0.5.
  constexpr double kFrozen = 0.46738995451021814;
  const double rho = 0.5;
  const double q = gauss_legendre_01(
      [rho](double t) { return 1.0 / std::sqrt(2.0 * std::numbers::pi * (1.0 - t * rho)); }, 16);
  EXPECT_NEAR(q, kFrozen, 1e-10);
  EXPECT_NEAR(2.0 / (std::sqrt(2.0 * std::numbers::pi) * (1.0 + std::sqrt(1.0 - rho))), kFrozen, 1e-15);
}

TEST(CovEquality, LinearFunctionalsRecoverCovariance) {
  const auto spec = pair_correlated_spec(3, 0.5);
  const auto r = check_cov_equality(spec, Functional::coordinate(0), Functional::coordinate(1), 200'000, 8, 1);
  expect_pass(r);
  EXPECT_NEAR(std::get<double>(r.params.at("rhs")), 0.5, 1e-12);  // gradients are constant
  EXPECT_EQ(r.check_id, "cov-equality");
}

TEST(CovEquality, SmoothMaxPair) {
  expect_pass(check_cov_equality(identity_spec(3), Functional::log_sum(1.0), Functional::softmax_product(1.0, 0, 1),
                                 300'000, 16, 2));
}

TEST(CovEquality, RejectsFunctionalsWithoutGradient) {
  EXPECT_THROW(check_cov_equality(identity_spec(2), Functional::hard_max(), Functional::coordinate(0), 1000, 4, 1),
               UnsupportedFunctional);
  EXPECT_THROW(check_cov_equality(identity_spec(2), Functional::coordinate(2), Functional::coordinate(0), 1000, 4, 1),
               IndexError);
}

TEST(VarDiffIdentity, TwoRoutesAgree) {
  expect_pass(check_vardiff_identity(identity_spec(2), pair_correlated_spec(2, 0.5), 2.0, 200'000, 8, 3));
  expect_pass(check_vardiff_identity(identity_spec(3), pair_correlated_spec(3, 0.5), 1.0, 200'000, 8, 4));
}

TEST(VarDiffIdentity, DiagonalMismatchIsAnAssumptionViolation) {
  const auto y = scale_variances(identity_spec(3), std::vector<double>{1.0, 2.0, 1.0});
  EXPECT_THROW(check_vardiff_identity(identity_spec(3), y, 1.0, 1000, 4, 1), AssumptionViolated);
  EXPECT_THROW(check_vardiff_identity(identity_spec(3), identity_spec(2), 1.0, 1000, 4, 1), DimMismatch);
}

TEST(ThmIid, NonPositiveCovariance) {
  for (std::size_t d : {2, 3, 5})
    for (double b : {0.5, 2.0}) {
      const auto rs = check_thm_iid(d, b, 0, 1, 200'000, 10 * d + static_cast<std::uint64_t>(b * 10));
      ASSERT_EQ(rs.size(), 2u);
      for (const auto& r : rs) EXPECT_NE(r.verdict, Verdict::Fail) << failure_detail(r);
    }
  EXPECT_THROW(check_thm_iid(3, 1.0, 0, 0, 1000, 1), InvalidArgument);
  EXPECT_THROW(check_thm_iid(3, -1.0, 0, 1, 1000, 1), InvalidArgument);
  EXPECT_THROW(check_thm_iid(3, 1.0, 0, 3, 1000, 1), IndexError);
}

TEST(BivariateCov, NonPositiveForAnyCorrelation) {
  for (double rho : {-0.5, 0.0, 0.7}) {
    const auto r = check_bivariate_cov(rho, 1.0, 200'000, 5);
    EXPECT_NE(r.verdict, Verdict::Fail) << failure_detail(r);
  }
}

TEST(ThmRho, BivariateExactAndLimitRoute) {
  const auto rs = check_thm_rho(2, 0.5, 400'000, 6, true, 12);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].target, Target::equal(0.5 / std::numbers::pi));
  expect_all_pass(rs);
  EXPECT_THROW(check_thm_rho(3, 0.0, 1000, 1), RhoOutOfRange);
  EXPECT_THROW(check_thm_rho(3, 1.0, 1000, 1), RhoOutOfRange);
}

TEST(ThmRho, StrongCorrelationIsClearlyPositive) {
  const auto r = check_thm_rho(3, 0.9, 1'000'000, 7).front();
  expect_pass(r);
  EXPECT_GT(r.estimate.lower(), 0.0);
}

TEST(IConstantLadder, ApproachesLimit) {
  const auto rs = check_i_constant(3, 0.5, 1.0, 200'000, 8);
  ASSERT_EQ(rs.size(), 5u);
  expect_all_pass(rs);
  const auto& last = rs.back();
  EXPECT_EQ(last.check_id, "i-constant");
  EXPECT_NEAR(last.estimate.value, i_constant(0.5, 1.0), 0.02 * i_constant(0.5, 1.0));
}

TEST(IConstantLadder, NoiseAtTheLimitIsNotAReversal) {
  // The beta = 200 rung lands within 1e-8 of the limit here, the beta = 800 rung about one SE away.
  const auto rs = check_i_constant(10, 0.5, 1.0, 1'000'000, 1032976516837926082ULL);
  ASSERT_EQ(rs[3].check_id, "i-constant-monotone");
  EXPECT_EQ(rs[3].estimate.value, 0.0);
  expect_all_pass(rs);
}

TEST(KeyMax05, NonPositiveAlongPath) {
  for (double theta : {0.0, 0.5, 1.0}) {
    const auto r = check_key_max_05(3, 0.5, theta, 200'000, 9);
    EXPECT_NE(r.verdict, Verdict::Fail) << failure_detail(r);
  }
}

TEST(LemmaA1, SmallerFirstVarianceLowersCovariance) {
  expect_pass(check_lemma_a1(3, 0.25, 200'000, 10));
  const auto eq = check_lemma_a1(3, 1.0, 200'000, 11);
  EXPECT_EQ(eq.target, Target::equal(0.0));
  expect_pass(eq);
  EXPECT_THROW(check_lemma_a1(3, 1.5, 1000, 1), InvalidArgument);
}

TEST(Decreasing, OracleSequenceIsPositive) {
  const auto rs = check_decreasing(20, 0, 0);
  EXPECT_EQ(rs.size(), 2u * 19u);
  expect_all_pass(rs);
  const auto mc = check_decreasing(4, 200'000, 12);
  EXPECT_EQ(mc.size(), 3u * 3u);
  expect_all_pass(mc);
}

TEST(Slepian, LowerCorrelationRaisesMaximum) {
  const std::vector<double> u{-1.0, 0.0, 1.0};
  const auto rs = check_slepian(pair_correlated_spec(2, 0.5), identity_spec(2), 200'000, 13, u);
  ASSERT_EQ(rs.size(), 2u + u.size());
  expect_all_pass(rs);
  EXPECT_THROW(check_slepian(identity_spec(2), pair_correlated_spec(2, 0.5), 1000, 1, u), AssumptionViolated);
}

TEST(Harge, ListedCases) {
  const auto spec = identity_spec(3);
  expect_pass(check_harge(spec, Functional::squared_norm(), Weight::one(), 200'000, 14));
  expect_pass(check_harge(spec, Functional::squared_norm(), Weight::bump(), 200'000, 15, true));
  expect_pass(check_harge(spec, Functional::smooth_max(1.0), Weight::bump({1.0, 0.0, 0.0}), 200'000, 16));
  EXPECT_THROW(check_harge(spec, Functional::squared_norm(), Weight::bump({1.0, 0.0}), 200'000, 1), DimMismatch);
}

TEST(Harge, WeightParsing) {
  EXPECT_EQ(parse_weight("one").kind, Weight::Kind::One);
  EXPECT_EQ(parse_weight("sigmoid").kind, Weight::Kind::Sigmoid);
  const auto b = parse_weight("bump:1,0,0");
  EXPECT_EQ(b.kind, Weight::Kind::Bump);
  EXPECT_EQ(b.center, (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_THROW(parse_weight("gauss"), InvalidArgument);
}

TEST(OddEven, MeanVanishes) {
  for (double rho : {-0.5, 0.0, 0.9})
    for (double beta : {0.0, 1.0, 5.0}) expect_pass(check_bivariate_oddeven(rho, beta, 100'000, 17));
}

TEST(Reports, ParamsReconstructTheRun) {
  const auto a = check_bivariate_cov(0.3, 2.0, 50'000, 99);
  const auto& p = a.params;
  const auto b = check_bivariate_cov(std::get<double>(p.at("rho")), std::get<double>(p.at("beta")),
                                     static_cast<std::size_t>(std::get<std::uint64_t>(p.at("samples"))),
                                     static_cast<std::uint64_t>(std::get<std::uint64_t>(p.at("seed"))));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.verdict, judge(a.estimate, a.target));
}

TEST(Suite, SmallGridRunsAndPasses) {
  SuiteGrid grid;
  grid.dims = {3};
  grid.betas = {1.0};
  grid.rhos = {0.5};
  grid.thetas = {1.0};
  grid.c11s = {0.5};
  grid.nodes = 8;
  const auto rs = default_suite(200'000, 2024, grid);
  EXPECT_GT(rs.size(), 40u);
  for (const auto& r : rs) EXPECT_NE(r.verdict, Verdict::Fail) << failure_detail(r);
}
