#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gcmax/explorer.hpp"

using namespace gcmax;
using namespace gcmax::explore;

namespace {

Eigen::MatrixXd random_symmetric(std::size_t n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) m(i, j) = m(j, i) = scale * normal(rng);
  return m;
}

// Leading term of Cov(log S_N, p_i p_j) as beta -> 0:
// beta^2 / N^2 [ (1/N) sum_k (s_ik + s_jk) - (2/N^2) sum_kl s_kl ].
double small_beta_cov(const Eigen::MatrixXd& s, double beta, Eigen::Index i, Eigen::Index j) {
  const double n = static_cast<double>(s.rows());
  return beta * beta / (n * n) * ((s.row(i).sum() + s.row(j).sum()) / n - 2.0 * s.sum() / (n * n));
}

// Synthetic objectives with known sign; noise is a normal draw scaled by se.
Objective synthetic(double offset, double slope, double se) {
  return [=](const CorrelationSpec& spec, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const double scaled = se * std::sqrt(100'000.0 / static_cast<double>(n));
    return Estimate{offset + slope * spec(0, 1) + scaled * normal(rng), scaled, n};
  };
}

SearchOptions small_options(std::size_t budget, std::uint64_t seed) {
  SearchOptions o;
  o.dim = 3;
  o.budget = budget;
  o.n_per_eval = 20'000;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(RandomNonnegCorr, FeasibleAndDeterministic) {
  for (std::size_t n : {2, 3, 5, 10}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto spec = random_nonneg_corr(n, seed);
      EXPECT_TRUE(is_feasible(spec.entries())) << n << " " << seed;
      EXPECT_LE(spec.entries().maxCoeff(), 1.0);
    }
    EXPECT_EQ(random_nonneg_corr(n, 7).entries(), random_nonneg_corr(n, 7).entries());
  }
  EXPECT_NE(random_nonneg_corr(3, 1).entries(), random_nonneg_corr(3, 2).entries());
  EXPECT_THROW(random_nonneg_corr(1, 0), InvalidArgument);
}

TEST(ProjectFeasible, FixedPoints) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
  const auto p = project_feasible(ones);
  EXPECT_EQ(p.spec.entries(), ones);
  EXPECT_EQ(p.residual, 0.0);
  EXPECT_EQ(p.rounds, 0u);
  const auto spec = random_nonneg_corr(5, 3);
  EXPECT_EQ(project_feasible(spec.entries()).spec.entries(), spec.entries());
}

TEST(ProjectFeasible, NearIdentityContractsFast) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4) + random_symmetric(4, 1e-3, rng);
    const auto p = project_feasible(m);
    EXPECT_LE(p.residual, 1e-6);
    EXPECT_LE(p.rounds, 3u);
    EXPECT_TRUE(is_feasible(p.spec.entries()));
  }
}

TEST(ProjectFeasible, ArbitrarySymmetricInputsBecomeFeasible) {
  std::mt19937_64 rng(12);
  for (std::size_t n : {2, 3, 6}) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto p = project_feasible(random_symmetric(n, 1.5, rng));
      EXPECT_TRUE(is_feasible(p.spec.entries()));
      EXPECT_LE(p.residual, kProjectionTolerance);
    }
  }
  EXPECT_THROW(project_feasible(Eigen::MatrixXd::Ones(2, 3)), InvalidArgument);
}

TEST(ConjectureObjective, SmallBetaMatchesExpansion) {
  // Frozen: beta = 0.01, N = 3, s_12 = 1, other off-diagonals 0 gives 2e-4 / 81.
  constexpr double kLeading = 2.4691358024691358e-06;
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  s(0, 1) = s(1, 0) = 1.0;
  EXPECT_NEAR(small_beta_cov(s, 0.01, 0, 1), kLeading, 1e-20);
  const auto spec = CorrelationSpec::from_matrix(s, FactorPolicy::AllowEigenFallback);
  const Estimate e = conjecture_objective(0.01, 0, 1)(spec, 1'000'000, 5);
  EXPECT_TRUE(e.contains(kLeading)) << e.value << " +/- " << e.std_error;
  EXPECT_GT(e.lower(), 0.0);

  const Estimate iid = conjecture_objective(0.01, 0, 1)(identity_spec(3), 1'000'000, 6);
  EXPECT_NEAR(small_beta_cov(Eigen::MatrixXd::Identity(3, 3), 0.01, 0, 1), 0.0, 1e-20);
  EXPECT_LE(iid.value, 4.0 * iid.std_error);
}

TEST(Search, BudgetZeroEvaluatesInitialPoint) {
  const auto o = small_options(0, 3);
  const auto st = search(o);
  ASSERT_GE(st.log.size(), 1u);
  EXPECT_EQ(st.log.front().kind, StepKind::Initial);
  EXPECT_EQ(st.current.entries(), random_nonneg_corr(3, derive_seed(3, 1)).entries());
  EXPECT_EQ(st.best, st.log.front().estimate);
  EXPECT_EQ(st.iteration, 0u);
}

TEST(Search, Reproducible) {
  const auto o = small_options(30, 4);
  const auto a = search(o), b = search(o);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t k = 0; k < a.log.size(); ++k) {
    EXPECT_EQ(a.log[k].entries, b.log[k].entries);
    EXPECT_EQ(a.log[k].estimate, b.log[k].estimate);
  }
  EXPECT_EQ(search_reports(o, a), search_reports(o, b));
}

TEST(Search, InvariantsAlongTrajectory) {
  const auto o = small_options(60, 5);
  const auto st = search(o);
  double best = st.log.front().estimate.value;
  for (const auto& rec : st.log) {
    EXPECT_TRUE(is_feasible(rec.entries));
    if (rec.kind == StepKind::Reevaluation) best = rec.estimate.value;
    if (rec.kind == StepKind::Candidate && rec.accepted) {
      EXPECT_GT(rec.estimate.value, best);
      best = rec.estimate.value;
    }
  }
  EXPECT_EQ(st.best.value, best);
}

TEST(Search, StepHalvesAfterStagnation) {
  // A constant objective never improves, so the step halves every 20 iterations.
  auto flat = [](const CorrelationSpec&, std::size_t n, std::uint64_t) { return Estimate{-1.0, 0.0, n}; };
  const auto st = search(small_options(100, 6), flat);
  EXPECT_DOUBLE_EQ(st.step, 0.05 / 32.0);
  EXPECT_EQ(st.accepts, 0u);
  EXPECT_FALSE(st.counterexample);
}

TEST(Search, FlagsInjectedPositiveObjective) {
  // Positive wherever s_12 > 0.2; the climb pushes s_12 up and replication confirms.
  auto o = small_options(80, 7);
  const auto st = search(o, synthetic(-0.2, 1.0, 0.01));
  EXPECT_TRUE(st.counterexample);
  EXPECT_EQ(st.replications.size(), 3u);
  for (const auto& r : st.replications) {
    EXPECT_GT(r.lower(), 0.0);
    EXPECT_EQ(r.n, 4 * o.n_per_eval);
  }
  EXPECT_EQ(st.path.size(), 4u);
  const auto reports = search_reports(o, st);
  EXPECT_EQ(reports.back().check_id, "conjecture-search");
  EXPECT_EQ(reports.back().verdict, Verdict::Fail);
}

TEST(Search, NoFlagForNegativeObjective) {
  auto o = small_options(80, 8);
  const auto st = search(o, synthetic(-1.0, 0.5, 0.01));
  EXPECT_FALSE(st.counterexample);
  EXPECT_TRUE(st.replications.empty());
  EXPECT_EQ(search_reports(o, st).back().verdict, Verdict::Pass);
}

TEST(Search, NoiseAloneDoesNotRaiseFlag) {
  // Zero-mean objective with heavy noise: lucky candidates may clear 4 se once,
  // but replications at 4x samples do not all reproduce.
  auto o = small_options(200, 9);
  int flagged = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    o.seed = 100 + s;
    flagged += search(o, synthetic(0.0, 0.0, 1.0)).counterexample;
  }
  EXPECT_EQ(flagged, 0);
}

TEST(Search, RejectsBadIndices) {
  auto o = small_options(1, 1);
  o.j = 3;
  EXPECT_THROW(search(o), IndexError);
  o.j = 0;
  EXPECT_THROW(search(o), InvalidArgument);
}
