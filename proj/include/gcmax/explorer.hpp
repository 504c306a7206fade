#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcmax/correlation.hpp"
#include "gcmax/error.hpp"
#include "gcmax/estimators.hpp"
#include "gcmax/functional.hpp"
#include "gcmax/report.hpp"
#include "gcmax/rng.hpp"

// Stochastic search over correlation matrices with nonnegative entries for a
// positive Cov(log S_N, p_i p_j). The objective is a Monte Carlo estimate, so
// the search re-evaluates its incumbent with fresh noise and only flags a
// counterexample after independent replication.
namespace gcmax::explore {

inline constexpr std::size_t kMaxProjectionRounds = 100;
inline constexpr double kProjectionTolerance = 1e-6;

/// Gram matrix of N random unit vectors with nonnegative coordinates.
inline CorrelationSpec random_nonneg_corr(std::size_t n, std::uint64_t seed) {
  if (n < 2 || n > kMaxDim) throw InvalidArgument("dimension must lie in [2, " + std::to_string(kMaxDim) + "]");
  std::mt19937_64 engine(derive_seed(seed, 0x6e6f6e6e));
  std::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd v(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) v(i, k) = std::abs(normal(engine));
    v.row(i).normalize();
  }
  Eigen::MatrixXd gram = v * v.transpose();
  for (Eigen::Index i = 0; i < d; ++i) {
    gram(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double c = std::clamp(gram(i, j), 0.0, 1.0);
      gram(i, j) = gram(j, i) = c;
    }
  }
  return CorrelationSpec::from_matrix(gram, FactorPolicy::AllowEigenFallback);
}

namespace detail {

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline double most_negative_entry(const Eigen::MatrixXd& m) { return std::min(0.0, m.minCoeff()); }

}  // namespace detail

/// True for symmetric, unit-diagonal, entrywise nonnegative PSD matrices.
inline bool is_feasible(const Eigen::MatrixXd& m, double tol = kPsdTolerance) {
  if (m.rows() != m.cols() || m.rows() < 2) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 1.0) return false;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != m(j, i) || m(i, j) < 0.0) return false;
  }
  return detail::min_eigenvalue(m) >= -tol;
}

struct Projection {
  CorrelationSpec spec;
  double residual = 0.0;
  std::size_t rounds = 0;
};

/// Alternating projection onto {PSD, unit diagonal, nonnegative}: clip
/// negative entries, clip negative eigenvalues, rescale the diagonal to one.
/// The residual is the largest constraint violation left when the loop stops.
/// The result is then made exactly feasible by clipping and, if needed, a
/// shrink toward the identity.
inline Projection project_feasible(const Eigen::MatrixXd& input) {
  if (input.rows() != input.cols() || input.rows() < 2 || input.rows() > static_cast<Eigen::Index>(kMaxDim))
    throw InvalidArgument("projection needs a square matrix of dimension 2.." + std::to_string(kMaxDim));
  if (!input.allFinite()) throw NonFinite("projection input has non-finite entries");
  if (is_feasible(input)) return {CorrelationSpec::from_matrix(input, FactorPolicy::AllowEigenFallback), 0.0, 0};

  const Eigen::Index n = input.rows();
  Eigen::MatrixXd x = 0.5 * (input + input.transpose());
  double residual = std::numeric_limits<double>::infinity();
  std::size_t rounds = 0;
  while (rounds < kMaxProjectionRounds && residual > kProjectionTolerance) {
    ++rounds;
    x = x.cwiseMax(0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x);
    x = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) scale[i] = x(i, i) > 0.0 ? 1.0 / std::sqrt(x(i, i)) : 0.0;
    x = scale.asDiagonal() * x * scale.asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (scale[i] == 0.0) {
        x.row(i).setZero();
        x.col(i).setZero();
      }
      x(i, i) = 1.0;
    }
    x = 0.5 * (x + x.transpose());
    residual = std::max(-detail::most_negative_entry(x), -detail::min_eigenvalue(x));
  }
  if (residual > kProjectionTolerance)
    throw ProjectionStalled("projection residual " + format_double(residual) + " after " +
                            std::to_string(rounds) + " rounds");
  x = x.cwiseMax(0.0);
  const double lambda = detail::min_eigenvalue(x);
  if (lambda < 0.0) {
    const double t = -lambda / (1.0 - lambda);
    x = (1.0 - t) * x + t * Eigen::MatrixXd::Identity(n, n);
  }
  for (Eigen::Index i = 0; i < n; ++i) x(i, i) = 1.0;
  return {CorrelationSpec::from_matrix(x, FactorPolicy::AllowEigenFallback), residual, rounds};
}

/// Noisy objective: an estimate for spec from n draws with the given seed.
using Objective = std::function<Estimate(const CorrelationSpec&, std::size_t n, std::uint64_t seed)>;

/// Cov(log S_N, p_i p_j) under Normal(0, spec).
inline Objective conjecture_objective(double beta, std::size_t i, std::size_t j) {
  const Functional f = Functional::log_sum(beta), g = Functional::softmax_product(beta, i, j);
  return [f, g](const CorrelationSpec& spec, std::size_t n, std::uint64_t seed) {
    f.validate(spec.dim());
    g.validate(spec.dim());
    return mc_cov(f, g, spec, n, seed);
  };
}

struct SearchOptions {
  std::size_t dim = 3;
  double beta = 1.0;
  std::size_t i = 0;
  std::size_t j = 1;
  std::size_t budget = 200;
  std::size_t n_per_eval = 100'000;
  std::uint64_t seed = 1;
  double step = 0.05;
  std::size_t patience = 20;       // non-improving steps before the step halves
  std::size_t reeval_every = 10;   // accepts between incumbent re-evaluations
  std::size_t replications = 3;    // independent confirmations of a flag
  std::size_t replication_factor = 4;
  std::vector<double> path_thetas{0.25, 0.5, 0.75, 1.0};
};

enum class StepKind { Initial, Candidate, Reevaluation, Replication, Path };

inline std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::Initial: return "initial";
    case StepKind::Candidate: return "candidate";
    case StepKind::Reevaluation: return "reevaluation";
    case StepKind::Replication: return "replication";
    case StepKind::Path: return "path";
  }
  return "?";
}

struct SearchLogRecord {
  std::size_t iteration = 0;
  StepKind kind = StepKind::Candidate;
  Eigen::MatrixXd entries;
  Estimate estimate;
  bool accepted = false;
  double step = 0.0;
  double theta = 1.0;  // Path records only
  std::uint64_t seed = 0;
};

struct PathPoint {
  double theta;
  Estimate estimate;
};

struct SearchState {
  CorrelationSpec current;
  Estimate objective;
  CorrelationSpec best_spec;
  Estimate best;
  std::size_t iteration = 0;
  std::uint64_t rng_seed = 0;
  double step = 0.0;
  std::size_t accepts = 0;
  bool counterexample = false;
  std::vector<Estimate> replications;
  std::vector<PathPoint> path;
  std::vector<SearchLogRecord> log;
};

namespace detail {

inline void require_feasible(const CorrelationSpec& spec) {
  if (!is_feasible(spec.entries())) throw AssumptionViolated("search produced an infeasible correlation matrix");
}

}  // namespace detail

/// Hill climbing on the off-diagonal entries, maximizing the objective.
inline SearchState search(const SearchOptions& opt, const Objective& objective) {
  if (opt.dim < 2 || opt.dim > kMaxDim) throw InvalidArgument("dimension must lie in [2, 64]");
  if (opt.i >= opt.dim || opt.j >= opt.dim) throw IndexError("objective index exceeds dimension");
  if (opt.i == opt.j) throw InvalidArgument("indices i and j must differ");
  if (!(opt.step > 0.0)) throw InvalidArgument("step must be positive");

  const std::uint64_t eval_stream = derive_seed(opt.seed, 2);
  std::uint64_t eval_counter = 0;
  auto fresh_seed = [&] { return derive_seed(eval_stream, eval_counter++); };
  std::mt19937_64 engine(derive_seed(opt.seed, 3));
  std::normal_distribution<double> normal;

  const CorrelationSpec start = random_nonneg_corr(opt.dim, derive_seed(opt.seed, 1));
  SearchState st{start, {}, start, {}, 0, 0, 0.0, 0, false, {}, {}, {}};
  st.rng_seed = opt.seed;
  st.step = opt.step;
  detail::require_feasible(st.current);
  {
    const std::uint64_t s = fresh_seed();
    st.objective = objective(st.current, opt.n_per_eval, s);
    st.log.push_back({0, StepKind::Initial, st.current.entries(), st.objective, true, st.step, 1.0, s});
  }
  st.best = st.objective;

  const auto d = static_cast<Eigen::Index>(opt.dim);
  std::size_t stale = 0;
  for (std::size_t it = 1; it <= opt.budget; ++it) {
    st.iteration = it;
    Eigen::MatrixXd m = st.current.entries();
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = a + 1; b < d; ++b) {
        m(a, b) += st.step * normal(engine);
        m(b, a) = m(a, b);
      }
    const CorrelationSpec candidate = project_feasible(m).spec;
    detail::require_feasible(candidate);
    const std::uint64_t s = fresh_seed();
    const Estimate est = objective(candidate, opt.n_per_eval, s);
    const bool accept = est.value > st.objective.value;
    st.log.push_back({it, StepKind::Candidate, candidate.entries(), est, accept, st.step, 1.0, s});
    if (accept) {
      st.current = candidate;
      st.objective = est;
      ++st.accepts;
      stale = 0;
      if (est.value > st.best.value) {
        st.best_spec = candidate;
        st.best = est;
      }
      if (opt.reeval_every > 0 && st.accepts % opt.reeval_every == 0) {
        // Racing guard: an incumbent that won on lucky noise loses its edge here.
        const std::uint64_t rs = fresh_seed();
        st.objective = objective(st.current, opt.n_per_eval, rs);
        st.best_spec = st.current;
        st.best = st.objective;
        st.log.push_back({it, StepKind::Reevaluation, st.current.entries(), st.objective, true, st.step, 1.0, rs});
      }
    } else if (++stale >= opt.patience) {
      st.step *= 0.5;
      stale = 0;
    }
  }

  if (st.best.lower() > 0.0) {
    bool all = opt.replications > 0;
    for (std::size_t k = 0; k < opt.replications; ++k) {
      const std::uint64_t rs = derive_seed(derive_seed(opt.seed, 4), k);
      const Estimate rep = objective(st.best_spec, opt.replication_factor * opt.n_per_eval, rs);
      st.replications.push_back(rep);
      st.log.push_back({st.iteration, StepKind::Replication, st.best_spec.entries(), rep, false, st.step, 1.0, rs});
      all = all && rep.lower() > 0.0;
    }
    st.counterexample = all;
  }

  if (st.best.upper() > 0.0) {
    // Points along the path from the identity to the best matrix found.
    const CorrelationSpec origin = identity_spec(opt.dim);
    for (std::size_t k = 0; k < opt.path_thetas.size(); ++k) {
      const double theta = opt.path_thetas[k];
      const CorrelationSpec z = interpolate_sigma(origin, st.best_spec, theta);
      const std::uint64_t ps = derive_seed(derive_seed(opt.seed, 5), k);
      const Estimate e = objective(z, opt.n_per_eval, ps);
      st.path.push_back({theta, e});
      st.log.push_back({st.iteration, StepKind::Path, z.entries(), e, false, st.step, theta, ps});
    }
  }
  return st;
}

inline SearchState search(const SearchOptions& opt) {
  return search(opt, conjecture_objective(opt.beta, opt.i, opt.j));
}

inline std::string describe_entries(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (!out.empty()) out += ';';
      out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + format_double(m(i, j));
    }
  return out;
}

/// One record per log entry plus a summary. The summary estimate is the
/// weakest replication when a replication ran (otherwise the best estimate),
/// judged "at most 0": it fails exactly when a counterexample is flagged.
inline std::vector<CheckReport> search_reports(const SearchOptions& opt, const SearchState& st) {
  std::vector<CheckReport> out;
  for (const auto& rec : st.log) {
    Params p{{"iteration", static_cast<std::uint64_t>(rec.iteration)},
             {"kind", std::string(to_string(rec.kind))},
             {"accepted", static_cast<std::uint64_t>(rec.accepted)},
             {"step", rec.step},
             {"corr", describe_entries(rec.entries)},
             {"seed", static_cast<std::uint64_t>(rec.seed)}};
    if (rec.kind == StepKind::Path) p["theta"] = rec.theta;
    out.push_back(make_report("search-step", std::move(p), rec.estimate, Target::none()));
  }
  Estimate summary = st.replications.empty() ? st.best : st.replications.front();
  for (const auto& r : st.replications)
    if (r.lower() < summary.lower()) summary = r;
  Params p{{"N", static_cast<std::uint64_t>(opt.dim)},
           {"beta", opt.beta},
           {"i", static_cast<std::uint64_t>(opt.i + 1)},
           {"j", static_cast<std::uint64_t>(opt.j + 1)},
           {"budget", static_cast<std::uint64_t>(opt.budget)},
           {"samples", static_cast<std::uint64_t>(opt.n_per_eval)},
           {"seed", static_cast<std::uint64_t>(opt.seed)},
           {"corr", describe_entries(st.best_spec.entries())},
           {"best", st.best.value},
           {"replications", static_cast<std::uint64_t>(st.replications.size())},
           {"counterexample", static_cast<std::uint64_t>(st.counterexample)}};
  out.push_back(make_report("conjecture-search", std::move(p), summary, Target::at_most(0.0)));
  return out;
}

}  // namespace gcmax::explore
