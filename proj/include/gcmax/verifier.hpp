#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gcmax/correlation.hpp"
#include "gcmax/error.hpp"
#include "gcmax/estimators.hpp"
#include "gcmax/functional.hpp"
#include "gcmax/quadrature.hpp"
#include "gcmax/report.hpp"
#include "gcmax/sampling.hpp"
#include "gcmax/smoothmax.hpp"

// Executable checks of the comparison identities and inequalities for maxima
// of correlated Gaussian vectors. Every check is deterministic given its
// arguments and returns CheckReport records whose verdict follows from the
// estimate and target alone.
namespace gcmax::verify {

inline constexpr std::array<double, 3> kBetaLadder{50.0, 200.0, 800.0};
/// Relative slack allowed for the limit-constant check at the top of the ladder.
inline constexpr double kLimitRelativeSlack = 0.02;

inline ParamValue iparam(std::uint64_t v) { return v; }

namespace detail {

inline void require_dim(std::size_t n, std::size_t min_dim) {
  if (n < min_dim) throw InvalidArgument("dimension must be at least " + std::to_string(min_dim));
  if (n > kMaxDim) throw InvalidArgument("dimension must be at most " + std::to_string(kMaxDim));
}

inline void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
}

inline void require_index(std::size_t k, std::size_t dim) {
  if (k >= dim) throw IndexError("index " + std::to_string(k + 1) + " exceeds dimension " + std::to_string(dim));
}

/// Weighted sum of independent node estimates.
inline Estimate combine(std::span<const double> weights, std::span<const Estimate> parts) {
  stats::CompensatedSum value, var;
  std::size_t n = parts.empty() ? 0 : parts[0].n;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    value.add(weights[k] * parts[k].value);
    var.add(weights[k] * weights[k] * parts[k].std_error * parts[k].std_error);
    n = std::min(n, parts[k].n);
  }
  return {value.value(), std::sqrt(var.value()), n};
}

/// Cov(x, y) with its influence values (x - mx)(y - my) - c, for use in
/// composite estimators.
struct CovarianceParts {
  double mean_x;
  double mean_y;
  double cov;
};

inline CovarianceParts covariance_parts(std::span<const double> x, std::span<const double> y) {
  const double mx = stats::mean(x), my = stats::mean(y);
  stats::CompensatedSum c;
  for (std::size_t r = 0; r < x.size(); ++r) c.add((x[r] - mx) * (y[r] - my));
  return {mx, my, c.value() / static_cast<double>(x.size() - 1)};
}

}  // namespace detail

/// I(rho, theta) = 1 / (2 sqrt(pi (1 - theta rho))).
inline double i_constant(double rho, double theta) {
  const double s2 = 1.0 - theta * rho;
  if (!(s2 > 0.0)) throw RhoOutOfRange("1 - theta * rho must be positive");
  return 1.0 / (2.0 * std::sqrt(std::numbers::pi * s2));
}

/// Cov(f(G), g(G)) against the integral over b of E[grad f(G_b)' C grad g(H_b)].
inline CheckReport check_cov_equality(const CorrelationSpec& spec, const Functional& f, const Functional& g,
                                      std::size_t n_mc, std::size_t b_nodes, std::uint64_t seed) {
  const std::size_t dim = spec.dim();
  f.validate(dim);
  g.validate(dim);
  if (!f.has_gradient()) throw UnsupportedFunctional(f.name() + " has no analytic gradient");
  if (!g.has_gradient()) throw UnsupportedFunctional(g.name() + " has no analytic gradient");
  const Estimate lhs = mc_cov(f, g, spec, n_mc, derive_seed(seed, 0));

  const QuadratureRule rule = gauss_legendre_rule_01(b_nodes);
  const Eigen::MatrixXd& c = spec.entries();
  std::vector<Estimate> parts;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    auto table = evaluate_coupled(spec, rule.nodes[k], n_mc, derive_seed(seed, 1 + k), 1,
                                  [&](std::span<const double> gb, std::span<const double> hb, std::span<double> out) {
                                    std::array<double, kMaxDim> df{}, dg{};
                                    f.gradient(gb, std::span(df.data(), dim));
                                    g.gradient(hb, std::span(dg.data(), dim));
                                    double acc = 0.0;
                                    for (std::size_t a = 0; a < dim; ++a) {
                                      double row = 0.0;
                                      for (std::size_t b = 0; b < dim; ++b) row += c(a, b) * dg[b];
                                      acc += df[a] * row;
                                    }
                                    out[0] = acc;
                                  });
    parts.push_back(stats::mean_estimate(table.column(0)));
  }
  const Estimate rhs = detail::combine(rule.weights, parts);
  Params params{{"N", iparam(dim)},        {"corr", describe_correlation(spec)},
                {"f", f.name()},           {"g", g.name()},
                {"samples", iparam(n_mc)},       {"nodes", iparam(b_nodes)},
                {"seed", iparam(seed)},    {"lhs", lhs.value},
                {"rhs", rhs.value}};
  if (f.uses_beta() || g.uses_beta()) params["beta"] = f.uses_beta() ? f.beta : g.beta;
  return make_report("cov-equality", std::move(params), difference(lhs, rhs), Target::equal(0.0));
}

/// Var(Q(Y)) - Var(Q(X)) by common-noise sampling against the theta integral
/// of sum_{i<j} dS_ij (2 E[p_i p_j] - 2 beta Cov(Q, p_i p_j)) under Sigma(theta).
inline CheckReport check_vardiff_identity(const CorrelationSpec& spec_x, const CorrelationSpec& spec_y, double beta,
                                          std::size_t n_mc, std::size_t theta_nodes, std::uint64_t seed) {
  if (spec_x.dim() != spec_y.dim()) throw DimMismatch("specs must share a dimension");
  const std::size_t dim = spec_x.dim();
  for (std::size_t i = 0; i < dim; ++i)
    if (spec_x(i, i) != spec_y(i, i)) throw AssumptionViolated("diagonals of the two specs differ");
  detail::require_beta(beta);
  const Functional q = Functional::smooth_max(beta);
  const Estimate lhs = paired_var_diff(q, spec_x, spec_y, n_mc, derive_seed(seed, 0)).as_estimate();

  const Eigen::MatrixXd delta = spec_y.entries() - spec_x.entries();
  const QuadratureRule rule = gauss_legendre_rule_01(theta_nodes);
  std::vector<Estimate> parts;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const CorrelationSpec z = interpolate_sigma(spec_x, spec_y, rule.nodes[k]);
    auto table = evaluate(z, n_mc, derive_seed(seed, 1 + k), 2, [&](std::span<const double> x, std::span<double> out) {
      std::array<double, kMaxDim> p{};
      const auto s = smoothmax::evaluate_into(x, beta, std::span(p.data(), dim));
      double t = 0.0;
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j) t += delta(i, j) * p[i] * p[j];
      out[0] = s.q;
      out[1] = t;
    });
    const auto qc = table.column(0), tc = table.column(1);
    const auto cp = detail::covariance_parts(qc, tc);
    std::vector<double> influence(n_mc);
    for (std::size_t r = 0; r < n_mc; ++r)
      influence[r] = 2.0 * (tc[r] - cp.mean_y) - 2.0 * beta * ((qc[r] - cp.mean_x) * (tc[r] - cp.mean_y) - cp.cov);
    parts.push_back(stats::influence_estimate(2.0 * cp.mean_y - 2.0 * beta * cp.cov, influence));
  }
  const Estimate rhs = detail::combine(rule.weights, parts);
  Params params{{"N", iparam(dim)},
                {"corr-x", describe_correlation(spec_x)},
                {"corr-y", describe_correlation(spec_y)},
                {"beta", beta},
                {"samples", iparam(n_mc)},
                {"nodes", iparam(theta_nodes)},
                {"seed", iparam(seed)},
                {"lhs", lhs.value},
                {"rhs", rhs.value}};
  return make_report("vardiff-identity", std::move(params), difference(lhs, rhs), Target::equal(0.0));
}

/// Cov(log S_N, p_i p_j) <= 0 for i.i.d. coordinates, plus the consequence
/// Cov(log S_N, p_i (1 - p_i)) <= 0.
inline std::vector<CheckReport> check_thm_iid(std::size_t n_dim, double beta, std::size_t i, std::size_t j,
                                              std::size_t n, std::uint64_t seed) {
  detail::require_dim(n_dim, 2);
  detail::require_beta(beta);
  detail::require_index(i, n_dim);
  detail::require_index(j, n_dim);
  if (i == j) throw InvalidArgument("indices i and j must differ");
  gcmax::detail::require_samples(n);
  const auto spec = identity_spec(n_dim);
  auto table = evaluate(spec, n, seed, 3, [&](std::span<const double> x, std::span<double> out) {
    std::array<double, kMaxDim> p{};
    const auto s = smoothmax::evaluate_into(x, beta, std::span(p.data(), n_dim));
    out[0] = s.log_s;
    out[1] = p[i] * p[j];
    out[2] = p[i] * (1.0 - p[i]);
  });
  Params params{{"N", iparam(n_dim)}, {"beta", beta},    {"i", iparam(i + 1)},
                {"j", iparam(j + 1)}, {"samples", iparam(n)}, {"seed", iparam(seed)}};
  std::vector<CheckReport> out;
  out.push_back(make_report("thm-iid", params, stats::covariance_estimate(table.column(0), table.column(1)),
                            Target::less_equal(0.0)));
  params.erase("j");
  out.push_back(make_report("thm-iid-spread", params,
                            stats::covariance_estimate(table.column(0), table.column(2)), Target::less_equal(0.0)));
  return out;
}

/// Cov(log S_2, p_1 p_2) <= 0 for a bivariate Gaussian with correlation rho.
inline CheckReport check_bivariate_cov(double rho, double beta, std::size_t n, std::uint64_t seed) {
  detail::require_beta(beta);
  const auto spec = pair_correlated_spec(2, rho);
  const Estimate e = mc_cov(Functional::log_sum(beta), Functional::softmax_product(beta, 0, 1), spec, n, seed);
  return make_report("bivariate-cov", {{"rho", rho}, {"beta", beta}, {"samples", iparam(n)}, {"seed", iparam(seed)}}, e,
                     Target::less_equal(0.0));
}

/// Var(M_N(Y)) - Var(M_N(X)) for X i.i.d. and Y with a single correlation rho
/// between coordinates 1 and 2. For N = 2 the exact value rho / pi is the
/// target. With `limit_route`, the difference is also computed as
/// -2 rho int_0^1 I(rho, theta) (E[M' 1_A] - E[M] P[A]) dtheta and the two
/// routes are compared.
inline std::vector<CheckReport> check_thm_rho(std::size_t n_dim, double rho, std::size_t n, std::uint64_t seed,
                                              bool limit_route = false,
                                              std::size_t theta_nodes = kDefaultQuadratureOrder) {
  detail::require_dim(n_dim, 2);
  if (!(rho > 0.0 && rho < 1.0)) throw RhoOutOfRange("rho must lie in (0, 1)");
  const auto x = identity_spec(n_dim), y = pair_correlated_spec(n_dim, rho);
  const Functional m = Functional::hard_max();
  const Estimate direct = paired_var_diff(m, x, y, n, derive_seed(seed, 0)).as_estimate();
  Params params{{"N", iparam(n_dim)}, {"rho", rho}, {"samples", iparam(n)}, {"seed", iparam(seed)}};
  std::vector<CheckReport> out;
  const Target target = n_dim == 2 ? Target::equal(rho / std::numbers::pi) : Target::greater_equal(0.0);
  out.push_back(make_report("thm-rho", params, direct, target));
  if (!limit_route) return out;

  const QuadratureRule rule = gauss_legendre_rule_01(theta_nodes);
  std::vector<Estimate> parts;
  std::vector<double> weights;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double theta = rule.nodes[k];
    const auto z = interpolate_sigma(x, y, theta);
    auto table = evaluate(z, n, derive_seed(seed, 1 + k), 3, [&](std::span<const double> v, std::span<double> o) {
      o[0] = smoothmax::reduced_max(v);
      o[1] = smoothmax::indicator_a_plus(v);
      o[2] = smoothmax::hard_max(v).value;
    });
    const auto mr = table.column(0), a = table.column(1), mx = table.column(2);
    std::vector<double> prod(n);
    for (std::size_t r = 0; r < n; ++r) prod[r] = mr[r] * a[r];
    const double e_prod = stats::mean(prod), e_a = stats::mean(a), e_m = stats::mean(mx);
    std::vector<double> influence(n);
    for (std::size_t r = 0; r < n; ++r)
      influence[r] = (prod[r] - e_prod) - e_a * (mx[r] - e_m) - e_m * (a[r] - e_a);
    parts.push_back(stats::influence_estimate(e_prod - e_m * e_a, influence));
    weights.push_back(-2.0 * rho * rule.weights[k] * i_constant(rho, theta));
  }
  const Estimate limit = detail::combine(weights, parts);
  Params lp = params;
  lp["nodes"] = iparam(theta_nodes);
  lp["direct"] = direct.value;
  lp["limit"] = limit.value;
  out.push_back(make_report("thm-rho-limit", std::move(lp), difference(direct, limit), Target::equal(0.0)));
  return out;
}

struct IConstantLadder {
  double beta;
  Estimate ratio;
};

/// E[beta p_1 p_2] / P[A+] under Sigma(theta) for each beta of the ladder, all
/// from the same draws. The z1 - z2 direction is integrated by importance
/// sampling: W = beta z- is drawn from a logistic law whose density is
/// proportional to (2 cosh(w / sqrt 2))^-2, the large-beta shape of p_1 p_2.
inline std::vector<IConstantLadder> i_constant_ladder(std::size_t n_dim, double rho, double theta, std::size_t n,
                                                      std::uint64_t seed, std::span<const double> betas) {
  detail::require_dim(n_dim, 2);
  gcmax::detail::require_samples(n);
  const double s2 = 1.0 - theta * rho;
  if (!(s2 > 0.0) || !(1.0 + theta * rho > 0.0)) throw RhoOutOfRange("theta * rho must lie in (-1, 1)");
  const double plus_sd = std::sqrt(1.0 + theta * rho);
  const double scale = 1.0 / std::numbers::sqrt2;
  const double log_q_const = std::log(std::numbers::sqrt2 / 4.0);
  const double log_phi_const = -0.5 * std::log(2.0 * std::numbers::pi * s2);
  const std::size_t nb = betas.size();
  // Columns: the event indicator, then one weighted value per beta.
  auto table = evaluate(identity_spec(n_dim), n, seed, 1 + nb, [&](std::span<const double> xi, std::span<double> out) {
    const double zplus = plus_sd * xi[0];
    // Logistic(0, 1/sqrt 2) by inverting its CDF at U = Phi(xi_1).
    const double w = scale * (std::log(std::erfc(-xi[1] / std::numbers::sqrt2)) -
                              std::log(std::erfc(xi[1] / std::numbers::sqrt2)));
    const double a = std::abs(w) / std::numbers::sqrt2;
    const double log_cosh = a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
    const double log_q = log_q_const - 2.0 * log_cosh;
    std::array<double, kMaxDim> x{}, p{};
    for (std::size_t k = 2; k < n_dim; ++k) x[k] = xi[k];
    out[0] = zplus / std::numbers::sqrt2 > smoothmax::tail_max(std::span<const double>(x.data(), n_dim), 2) ? 1.0
                                                                                                        : 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const double beta = betas[b];
      const double zminus = w / beta;
      x[0] = (zplus + zminus) / std::numbers::sqrt2;
      x[1] = (zplus - zminus) / std::numbers::sqrt2;
      const auto s = smoothmax::evaluate_into(std::span<const double>(x.data(), n_dim), beta,
                                              std::span(p.data(), n_dim));
      const double log_pp = beta * (x[0] + x[1]) - 2.0 * s.log_s;
      const double log_phi = log_phi_const - zminus * zminus / (2.0 * s2);
      out[1 + b] = std::exp(log_pp + log_phi - log_q);
    }
  });
  const auto a = table.column(0);
  const double e_a = stats::mean(a);
  if (!(e_a > 0.0)) throw DegenerateWeights("the event A+ was never observed");
  std::vector<IConstantLadder> out;
  std::vector<double> influence(n);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto y = table.column(1 + b);
    const double ratio = stats::mean(y) / e_a;
    for (std::size_t r = 0; r < n; ++r) influence[r] = (y[r] - ratio * a[r]) / e_a;
    out.push_back({betas[b], stats::influence_estimate(ratio, influence)});
  }
  return out;
}

/// Limit constant: E[beta p_1 p_2] / P[A+] approaches I(rho, theta) as beta
/// grows. Reports each ladder rung, the number of rungs whose distance to I
/// grows by more than z combined standard errors, and the final rung against I
/// with max(z se, 2%) slack.
inline std::vector<CheckReport> check_i_constant(std::size_t n_dim, double rho, double theta, std::size_t n,
                                                 std::uint64_t seed,
                                                 std::span<const double> betas = kBetaLadder) {
  if (betas.empty()) throw InvalidArgument("beta ladder must not be empty");
  for (double b : betas) detail::require_beta(b);
  const double exact = i_constant(rho, theta);
  const auto ladder = i_constant_ladder(n_dim, rho, theta, n, seed, betas);
  Params params{{"N", iparam(n_dim)}, {"rho", rho},         {"theta", theta},
                {"samples", iparam(n)},     {"seed", iparam(seed)}, {"closed_form", exact}};
  std::vector<CheckReport> out;
  std::size_t violations = 0;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    Params p = params;
    p["beta"] = ladder[k].beta;
    out.push_back(make_report("i-constant-rung", std::move(p), ladder[k].ratio, Target::none()));
    if (k == 0) continue;
    const auto& prev = ladder[k - 1].ratio;
    const auto& cur = ladder[k].ratio;
    const double noise = kConfidenceZ * std::hypot(prev.std_error, cur.std_error);
    if (std::abs(cur.value - exact) - std::abs(prev.value - exact) > noise) ++violations;
  }
  Params mono = params;
  mono["rungs"] = iparam(ladder.size());
  out.push_back(make_report("i-constant-monotone", std::move(mono),
                            Estimate{static_cast<double>(violations), 0.0, n}, Target::equal(0.0)));
  Params last = params;
  last["beta"] = ladder.back().beta;
  out.push_back(make_report("i-constant", std::move(last), ladder.back().ratio,
                            Target::equal(exact, kLimitRelativeSlack * exact)));
  return out;
}

/// Cov(M'_N, 1_{A+}) <= 0 under Sigma(theta) for the single-correlation family.
inline CheckReport check_key_max_05(std::size_t n_dim, double rho, double theta, std::size_t n,
                                    std::uint64_t seed) {
  detail::require_dim(n_dim, 2);
  if (!(rho >= 0.0 && rho <= 1.0)) throw RhoOutOfRange("rho must lie in [0, 1]");
  const auto z = interpolate_sigma(identity_spec(n_dim), pair_correlated_spec(n_dim, rho), theta);
  const Estimate e = mc_cov(Functional::reduced_max(), Functional::indicator_a_plus(), z, n, seed);
  return make_report("key-max-05",
                     {{"N", iparam(n_dim)}, {"rho", rho}, {"theta", theta}, {"samples", iparam(n)}, {"seed", iparam(seed)}},
                     e, Target::less_equal(0.0));
}

/// Cov(M_N, 1_{A_1}) <= 0 with independent coordinates, Var(G_1) = c11 <= 1
/// and unit variances elsewhere. At c11 = 1 the covariance is exactly zero by
/// exchangeability, so the target becomes equality.
inline CheckReport check_lemma_a1(std::size_t n_dim, double c11, std::size_t n, std::uint64_t seed) {
  detail::require_dim(n_dim, 2);
  if (!(c11 > 0.0 && c11 <= 1.0)) throw InvalidArgument("c11 must lie in (0, 1]");
  std::vector<double> variances(n_dim, 1.0);
  variances[0] = c11;
  const auto spec = make_diagonal_covariance(variances);
  const Estimate e = mc_cov(Functional::hard_max(), Functional::indicator_a1(), spec, n, seed);
  const Target target = c11 == 1.0 ? Target::equal(0.0) : Target::less_equal(0.0);
  return make_report("lemma-a1", {{"N", iparam(n_dim)}, {"c11", c11}, {"samples", iparam(n)}, {"seed", iparam(seed)}}, e,
                     target);
}

/// For N = 2..n_max: the quadrature sequence Var(M_{N-1}) - Var(M_N) > 0, the
/// Monte Carlo variance against quadrature, and the reported-only ratio
/// Var(M_N) * 2 log N.
inline std::vector<CheckReport> check_decreasing(std::size_t n_max, std::size_t n, std::uint64_t seed) {
  detail::require_dim(n_max, 2);
  std::vector<CheckReport> out;
  double prev = var_max_oracle(1);
  for (std::size_t d = 2; d <= n_max; ++d) {
    const double v = var_max_oracle(d);
    Params p{{"N", iparam(d)}};
    out.push_back(make_report("decreasing-oracle", p, Estimate{prev - v, 0.0, 0}, Target::greater(0.0)));
    if (n > 0) {
      Params pm{{"N", iparam(d)}, {"samples", iparam(n)}, {"seed", iparam(seed)}, {"oracle", v}};
      const Estimate mc = mc_var(Functional::hard_max(), identity_spec(d), n, derive_seed(seed, d));
      out.push_back(make_report("decreasing-mc", std::move(pm), mc, Target::equal(v)));
    }
    out.push_back(make_report("var-max-trend", p, Estimate{v * 2.0 * std::log(static_cast<double>(d)), 0.0, 0},
                              Target::none()));
    prev = v;
  }
  return out;
}

/// Slepian comparison: with equal diagonals and sigma^Y_ij <= sigma^X_ij, the
/// maximum of Y is larger in mean and in every survival probability.
inline std::vector<CheckReport> check_slepian(const CorrelationSpec& spec_x, const CorrelationSpec& spec_y,
                                              std::size_t n, std::uint64_t seed, std::span<const double> u_grid) {
  if (spec_x.dim() != spec_y.dim()) throw DimMismatch("specs must share a dimension");
  const std::size_t dim = spec_x.dim();
  for (std::size_t i = 0; i < dim; ++i) {
    if (spec_x(i, i) != spec_y(i, i)) throw AssumptionViolated("diagonals of the two specs differ");
    for (std::size_t j = 0; j < dim; ++j)
      if (i != j && spec_y(i, j) > spec_x(i, j))
        throw AssumptionViolated("the comparison needs sigma_y(i,j) <= sigma_x(i,j) for all i != j");
  }
  gcmax::detail::require_samples(n);
  auto table = evaluate_paired(spec_x, spec_y, n, seed, 2,
                               [](std::span<const double> x, std::span<const double> y, std::span<double> out) {
                                 out[0] = smoothmax::hard_max(x).value;
                                 out[1] = smoothmax::hard_max(y).value;
                               });
  const auto mx = table.column(0), my = table.column(1);
  std::vector<double> diff(n);
  for (std::size_t r = 0; r < n; ++r) diff[r] = my[r] - mx[r];
  Params params{{"N", iparam(dim)},
                {"corr-x", describe_correlation(spec_x)},
                {"corr-y", describe_correlation(spec_y)},
                {"samples", iparam(n)},
                {"seed", iparam(seed)}};
  std::vector<CheckReport> out;
  const Estimate mean_diff = stats::mean_estimate(diff);
  out.push_back(make_report("slepian-mean", params, mean_diff, Target::greater_equal(0.0)));
  if (dim == 2 && spec_x(0, 0) == 1.0 && spec_x(1, 1) == 1.0) {
    // E[M_2] = E|G_1 - G_2| / 2 = sqrt((1 - sigma_12) / pi) for unit variances.
    const double exact = std::sqrt((1.0 - spec_y(0, 1)) / std::numbers::pi) -
                         std::sqrt((1.0 - spec_x(0, 1)) / std::numbers::pi);
    out.push_back(make_report("slepian-mean-exact", params, mean_diff, Target::equal(exact)));
  }
  for (double u : u_grid) {
    for (std::size_t r = 0; r < n; ++r) diff[r] = (my[r] > u ? 1.0 : 0.0) - (mx[r] > u ? 1.0 : 0.0);
    Params p = params;
    p["u"] = u;
    out.push_back(make_report("slepian-survival", std::move(p), stats::mean_estimate(diff), Target::at_least(0.0)));
  }
  return out;
}

/// Log-concave weight g used by the drift-corrected convex/log-concave check.
struct Weight {
  enum class Kind { One, Bump, Sigmoid };
  Kind kind = Kind::One;
  std::vector<double> center;  // Bump only; empty means the origin

  static Weight one() { return {Kind::One, {}}; }
  static Weight bump(std::vector<double> center = {}) { return {Kind::Bump, std::move(center)}; }
  static Weight sigmoid() { return {Kind::Sigmoid, {}}; }

  double log_value(std::span<const double> x) const {
    switch (kind) {
      case Kind::One:
        return 0.0;
      case Kind::Bump: {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
          const double d = x[k] - (k < center.size() ? center[k] : 0.0);
          s += d * d;
        }
        return -0.5 * s;
      }
      case Kind::Sigmoid: {
        // prod_k 1 / (1 + e^{-x_k}), evaluated as -sum log1p(e^{-x_k}) stably.
        double s = 0.0;
        for (double v : x) s -= v > 0.0 ? std::log1p(std::exp(-v)) : -v + std::log1p(std::exp(v));
        return s;
      }
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::One:
        return "one";
      case Kind::Sigmoid:
        return "sigmoid";
      case Kind::Bump: {
        if (center.empty()) return "bump";
        std::string out = "bump:";
        for (std::size_t k = 0; k < center.size(); ++k) out += (k ? "," : "") + format_double(center[k]);
        return out;
      }
    }
    return "?";
  }

  bool operator==(const Weight&) const = default;
};

inline Weight parse_weight(std::string_view text) {
  if (text == "one") return Weight::one();
  if (text == "sigmoid") return Weight::sigmoid();
  if (text == "bump") return Weight::bump();
  if (text.starts_with("bump:")) {
    std::vector<double> c;
    std::string_view rest = text.substr(5);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      c.push_back(parse_double(rest.substr(0, comma)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return Weight::bump(std::move(c));
  }
  throw InvalidArgument("unknown weight '" + std::string(text) + "' (one, bump[:a1,a2,...], sigmoid)");
}

namespace detail {

struct HargeGap {
  double gap;
  double ess;
  double drift_norm;
};

// Reweighted mean of f after removing the estimated drift m, minus the plain
// mean of f, over rows [first, first + count).
template <class F>
HargeGap harge_gap(const SampleBatch& batch, std::span<const double> log_w, const F& f, std::size_t first,
                   std::size_t count) {
  const std::size_t dim = batch.dim;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t r = first; r < first + count; ++r) top = std::max(top, log_w[r]);
  std::vector<double> w(count);
  stats::CompensatedSum sw, sw2;
  std::vector<stats::CompensatedSum> sx(dim);
  for (std::size_t r = 0; r < count; ++r) {
    w[r] = std::exp(log_w[first + r] - top);
    sw.add(w[r]);
    sw2.add(w[r] * w[r]);
    const auto x = batch.row(first + r);
    for (std::size_t k = 0; k < dim; ++k) sx[k].add(w[r] * x[k]);
  }
  const double total = sw.value();
  std::array<double, kMaxDim> m{};
  double drift = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    m[k] = sx[k].value() / total;
    drift += m[k] * m[k];
  }
  stats::CompensatedSum shifted, plain;
  std::array<double, kMaxDim> y{};
  for (std::size_t r = 0; r < count; ++r) {
    const auto x = batch.row(first + r);
    for (std::size_t k = 0; k < dim; ++k) y[k] = x[k] - m[k];
    shifted.add(w[r] * f(std::span<const double>(y.data(), dim)));
    plain.add(f(x));
  }
  return {shifted.value() / total - plain.value() / static_cast<double>(count), total * total / sw2.value(),
          std::sqrt(drift)};
}

}  // namespace detail

/// Drift-corrected convex/log-concave inequality for centered mu = Normal(0, spec):
/// int f(x - m) g dmu / int g dmu <= int f dmu with m the g-weighted mean,
/// estimated by self-normalized importance sampling. The standard error comes
/// from replicate blocks. With g = 1 the two sides agree; `strict` asks for a
/// strictly negative gap.
inline CheckReport check_harge(const CorrelationSpec& spec, const Functional& f, const Weight& g, std::size_t n,
                               std::uint64_t seed, bool strict = false,
                               std::size_t replicates = kVarDiffReplicates) {
  const std::size_t dim = spec.dim();
  f.validate(dim);
  if (g.kind == Weight::Kind::Bump && !g.center.empty() && g.center.size() != dim)
    throw DimMismatch("bump center must have one entry per coordinate");
  gcmax::detail::require_samples(n);
  if (n < 2 * replicates) throw InvalidArgument("too few samples for replicate blocks");
  const SampleBatch batch = sample(spec, n, seed);
  std::vector<double> log_w(n);
  for (std::size_t r = 0; r < n; ++r) log_w[r] = g.log_value(batch.row(r));
  const auto full = detail::harge_gap(batch, log_w, f, 0, n);
  if (full.ess < static_cast<double>(n) / 100.0)
    throw DegenerateWeights("effective sample size " + format_double(full.ess) + " is below n / 100");
  std::vector<double> blocks(replicates);
  const std::size_t size = n / replicates;
  for (std::size_t k = 0; k < replicates; ++k) {
    const std::size_t first = k * size;
    blocks[k] = detail::harge_gap(batch, log_w, f, first, k + 1 == replicates ? n - first : size).gap;
  }
  const Estimate e{full.gap, std::sqrt(stats::variance(blocks) / static_cast<double>(replicates)), n};
  Target target = Target::less_equal(0.0);
  if (g.kind == Weight::Kind::One) target = Target::equal(0.0);
  else if (strict) target = Target::less(0.0);
  Params params{{"N", iparam(dim)},      {"corr", describe_correlation(spec)}, {"f", f.name()},
                {"g", g.name()},         {"samples", iparam(n)},                     {"seed", iparam(seed)},
                {"ess", full.ess},       {"drift_norm", full.drift_norm}};
  if (f.uses_beta()) params["beta"] = f.beta;
  return make_report("harge", std::move(params), e, target);
}

/// E[(G_1 + G_2) / (2 cosh(beta (G_1 - G_2) / 2))^2] = 0 for any bivariate
/// Gaussian with equal variances. beta = 0 is allowed.
inline CheckReport check_bivariate_oddeven(double rho, double beta, std::size_t n, std::uint64_t seed) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be non-negative");
  const auto spec = pair_correlated_spec(2, rho);
  const Estimate e = mc_mean(
      [beta](std::span<const double> g) {
        const double c = 2.0 * std::cosh(beta * (g[0] - g[1]) / 2.0);
        return (g[0] + g[1]) / (c * c);
      },
      spec, n, seed);
  return make_report("oddeven", {{"rho", rho}, {"beta", beta}, {"samples", iparam(n)}, {"seed", iparam(seed)}}, e,
                     Target::equal(0.0));
}

struct SuiteGrid {
  std::vector<std::size_t> dims{3, 5, 10};
  std::vector<double> betas{0.5, 1.0, 2.0, 5.0};
  std::vector<double> rhos{0.1, 0.5, 0.9};
  std::vector<double> thetas{0.0, 0.5, 1.0};
  std::vector<double> c11s{0.25, 0.5, 1.0};
  std::size_t nodes = kDefaultQuadratureOrder;
};

/// Every inequality and identity check over the default parameter grid. Each
/// check gets its own seed derived from `seed`.
inline std::vector<CheckReport> default_suite(std::size_t n, std::uint64_t seed, const SuiteGrid& grid = {}) {
  std::vector<CheckReport> out;
  std::uint64_t job = 0;
  auto next_seed = [&] { return derive_seed(seed, job++); };
  auto append = [&](std::vector<CheckReport> rs) {
    for (auto& r : rs) out.push_back(std::move(r));
  };
  for (std::size_t d : grid.dims)
    for (double b : grid.betas) {
      append(check_thm_iid(d, b, 0, 1, n, next_seed()));
      out.push_back(check_cov_equality(identity_spec(d), Functional::log_sum(b), Functional::softmax_product(b, 0, 1),
                                       n, grid.nodes, next_seed()));
    }
  for (double r : grid.rhos)
    for (double b : grid.betas) out.push_back(check_bivariate_cov(r, b, n, next_seed()));
  for (std::size_t d : grid.dims)
    for (double r : grid.rhos) {
      append(check_thm_rho(d, r, n, next_seed()));
      for (double t : grid.thetas) out.push_back(check_key_max_05(d, r, t, n, next_seed()));
      for (double b : grid.betas)
        out.push_back(
            check_vardiff_identity(identity_spec(d), pair_correlated_spec(d, r), b, n, grid.nodes, next_seed()));
    }
  for (std::size_t d : grid.dims)
    for (double c : grid.c11s) out.push_back(check_lemma_a1(d, c, n, next_seed()));
  const std::vector<double> u_grid{-1.0, 0.0, 0.5, 1.0, 2.0};
  for (std::size_t d : grid.dims)
    for (double r : grid.rhos) append(check_slepian(pair_correlated_spec(d, r), identity_spec(d), n, next_seed(), u_grid));
  for (std::size_t d : grid.dims) {
    const auto spec = identity_spec(d);
    std::vector<double> center(d, 0.0);
    center[0] = 1.0;
    out.push_back(check_harge(spec, Functional::squared_norm(), Weight::one(), n, next_seed()));
    out.push_back(check_harge(spec, Functional::squared_norm(), Weight::bump(), n, next_seed(), true));
    out.push_back(check_harge(spec, Functional::smooth_max(1.0), Weight::bump(center), n, next_seed()));
    out.push_back(check_harge(spec, Functional::hard_max(), Weight::sigmoid(), n, next_seed()));
  }
  for (double r : grid.rhos)
    for (double b : grid.betas) out.push_back(check_bivariate_oddeven(r, b, n, next_seed()));
  for (std::size_t d : grid.dims)
    for (double r : grid.rhos) append(check_i_constant(d, r, 1.0, n, next_seed()));
  append(check_decreasing(20, 0, 0));
  return out;
}

}  // namespace gcmax::verify
