#pragma once

#include <charconv>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcmax/config.hpp"
#include "gcmax/emit.hpp"
#include "gcmax/estimators.hpp"
#include "gcmax/explorer.hpp"
#include "gcmax/parallel.hpp"
#include "gcmax/report.hpp"
#include "gcmax/verifier.hpp"

namespace gcmax::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;
inline constexpr int kExitIndeterminate = 3;

inline constexpr std::size_t kDefaultSamples = 1'000'000;
inline constexpr std::size_t kDefaultSearchSamples = 100'000;

/// Thrown by parse_cli for --help; carries the help text.
struct HelpRequested {
  std::string text;
};

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kExitPass;
    case Verdict::Fail: return kExitFail;
    case Verdict::Indeterminate: return kExitIndeterminate;
  }
  return kExitError;
}

struct CommandInfo {
  std::string_view command;
  std::vector<std::string_view> names;  // empty: no subcommand
};

inline const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table{
      {"estimate", {"mean", "var", "cov"}},
      {"verify", {"cov-equality", "vardiff"}},
      {"theorem",
       {"thm-iid", "bivariate", "thm-rho", "i-constant", "key-max-05", "lemma-a1", "decreasing", "slepian", "harge",
        "oddeven", "suite"}},
      {"table", {"var-max", "i-constant"}},
      {"search", {}},
  };
  return table;
}

inline void validate(const RunConfig& cfg) {
  if (cfg.command.empty()) throw UsageError("missing command (estimate, verify, theorem, table, search)");
  const CommandInfo* info = nullptr;
  for (const auto& c : command_table())
    if (c.command == cfg.command) info = &c;
  if (!info) throw UsageError("unknown command '" + cfg.command + "'");
  if (info->names.empty()) {
    if (!cfg.name.empty()) throw UsageError("command '" + cfg.command + "' takes no name, got '" + cfg.name + "'");
  } else if (std::find(info->names.begin(), info->names.end(), cfg.name) == info->names.end()) {
    std::string list;
    for (auto n : info->names) list += (list.empty() ? "" : ", ") + std::string(n);
    throw UsageError(cfg.name.empty() ? "command '" + cfg.command + "' needs a name: " + list
                                      : "unknown " + cfg.command + " name '" + cfg.name + "' (" + list + ")");
  }
  for (const auto& [k, v] : cfg.params)
    if (!is_param_key(k)) throw UsageError("unknown parameter '" + k + "'");
  if (auto it = cfg.params.find("beta"); it != cfg.params.end()) {
    double b = 0.0;
    const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), b);
    if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
      throw UsageError("beta must be a number, got '" + it->second + "'");
    const bool zero_ok = cfg.command == "theorem" && cfg.name == "oddeven";
    if (!(b > 0.0) && !(zero_ok && b == 0.0)) throw UsageError("beta must be positive");
  }
}

/// Flags override values loaded from --config.
inline RunConfig parse_cli(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo checks of variance and covariance inequalities for maxima of Gaussian vectors",
               "gcmax"};
  std::string command, name, config_path;
  app.add_option("command", command, "estimate | verify | theorem | table | search");
  app.add_option("name", name, "what to run within the command");
  app.add_option("--config", config_path, "INI file with top-level keys and a section per command");
  static const std::map<std::string, std::string> help{
      {"seed", "master seed (default 1)"},
      {"samples", "Monte Carlo sample count"},
      {"threads", "worker threads (default GCMAX_THREADS or hardware)"},
      {"format", "csv | json"},
      {"output", "output file, '-' for stdout"},
      {"n-dim", "vector dimension N"},
      {"beta", "inverse temperature of the smooth max"},
      {"rho", "pair correlation"},
      {"theta", "interpolation weight in [0, 1]"},
      {"b", "coupling parameter in [0, 1]"},
      {"i", "first index (one-based)"},
      {"j", "second index (one-based)"},
      {"c11", "variance of the first coordinate"},
      {"n-min", "smallest N of a table"},
      {"n-max", "largest N of a table"},
      {"budget", "search iterations"},
      {"nodes", "Gauss-Legendre nodes"},
      {"f", "functional: max, reduced-max, smooth-max, log-sum, p:i, p-spread:i, pp:i,j, x:i, a-plus, a1, sqnorm, const:c"},
      {"g", "second functional, same syntax as --f"},
      {"weight", "log-concave weight: one, sigmoid, bump[:a1,a2,...]"},
      {"corr", "off-diagonal entries i,j,v;... or identity"},
      {"corr-x", "first correlation, same syntax as --corr"},
      {"corr-y", "second correlation, same syntax as --corr"},
      {"u-grid", "comma-separated thresholds"},
      {"limit", "use the large-beta route"},
      {"strict", "require a strict inequality"},
  };
  std::map<std::string, std::string> top;
  for (auto key : {"seed", "samples", "threads", "format", "output"})
    app.add_option(std::string("--") + key, top[key], help.at(key));
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags{{"limit", false}, {"strict", false}};
  for (auto key : kParamKeys) {
    const std::string k(key);
    if (flags.count(k)) app.add_flag("--" + k, flags[k], help.at(k));
    else app.add_option("--" + k, values[k], help.at(k));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) throw HelpRequested{app.help()};
    throw UsageError(e.what());
  }

  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (!command.empty()) {
    if (!config_path.empty() && command != cfg.command) cfg.params.clear();
    cfg.command = command;
  }
  if (!name.empty()) cfg.name = name;
  for (const auto& [k, v] : top)
    if (app.count("--" + k) > 0) set_top_level(cfg, k, v);
  for (const auto& [k, v] : values)
    if (app.count("--" + k) > 0) cfg.params[k] = v;
  for (const auto& [k, on] : flags)
    if (app.count("--" + k) > 0) cfg.params[k] = on ? "true" : "false";
  validate(cfg);
  return cfg;
}

/// Typed access to RunConfig::params with required-parameter errors.
class ParamReader {
 public:
  explicit ParamReader(const RunConfig& cfg) : cfg_(cfg) {}

  const std::string& text(const std::string& key) const {
    auto it = cfg_.params.find(key);
    if (it == cfg_.params.end()) throw UsageError("missing required parameter --" + key);
    return it->second;
  }
  std::string text_or(const std::string& key, std::string def) const {
    return cfg_.has(key) ? text(key) : std::move(def);
  }

  double real(const std::string& key) const {
    try {
      return parse_double(text(key));
    } catch (const InvalidArgument&) {
      throw UsageError("--" + key + " must be a number, got '" + text(key) + "'");
    }
  }
  double real_or(const std::string& key, double def) const { return cfg_.has(key) ? real(key) : def; }

  std::size_t count(const std::string& key) const { return detail::parse_unsigned<std::size_t>("--" + key, text(key)); }
  std::size_t count_or(const std::string& key, std::size_t def) const { return cfg_.has(key) ? count(key) : def; }

  /// One-based on the command line, zero-based in the library.
  std::size_t index_or(const std::string& key, std::size_t def_one_based) const {
    const std::size_t v = count_or(key, def_one_based);
    if (v == 0) throw UsageError("--" + key + " is one-based and must be at least 1");
    return v - 1;
  }

  bool flag(const std::string& key) const {
    const std::string v = text_or(key, "false");
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw UsageError("--" + key + " must be true or false, got '" + v + "'");
  }

  std::vector<double> reals_or(const std::string& key, std::vector<double> def) const {
    if (!cfg_.has(key)) return def;
    std::vector<double> out;
    std::string_view rest = text(key);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      out.push_back(parse_double(rest.substr(0, comma)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return out;
  }

  CorrelationSpec corr_or_identity(const std::string& key, std::size_t dim) const {
    if (!cfg_.has(key)) return identity_spec(dim);
    return make_correlation(dim, parse_off_diagonals(text(key)));
  }

  Functional functional(const std::string& key, double beta) const { return parse_functional(text(key), beta); }

  std::size_t samples(std::size_t def = kDefaultSamples) const { return cfg_.samples.value_or(def); }
  std::uint64_t seed() const { return cfg_.seed; }

 private:
  const RunConfig& cfg_;
};

inline std::vector<CheckReport> run_estimate(const RunConfig& cfg) {
  const ParamReader p(cfg);
  const std::size_t dim = p.count("n-dim");
  const double beta = p.real_or("beta", 1.0);
  const auto spec = p.corr_or_identity("corr", dim);
  const Functional f = p.functional("f", beta);
  f.validate(dim);
  const std::size_t n = p.samples();
  Params params{{"N", verify::iparam(dim)}, {"corr", describe_correlation(spec)}, {"f", f.name()},
                {"samples", verify::iparam(n)},   {"seed", verify::iparam(p.seed())}};
  if (cfg.has("beta")) params["beta"] = beta;
  Estimate e;
  if (cfg.name == "mean") {
    e = mc_mean(f, spec, n, p.seed());
  } else if (cfg.name == "var") {
    e = mc_var(f, spec, n, p.seed());
  } else {
    const Functional g = p.functional("g", beta);
    g.validate(dim);
    params["g"] = g.name();
    e = mc_cov(f, g, spec, n, p.seed());
  }
  return {make_report("estimate-" + cfg.name, std::move(params), e, Target::none())};
}

inline std::vector<CheckReport> run_verify(const RunConfig& cfg) {
  const ParamReader p(cfg);
  const std::size_t dim = p.count("n-dim");
  const std::size_t nodes = p.count_or("nodes", kDefaultQuadratureOrder);
  if (cfg.name == "cov-equality") {
    const double beta = p.real_or("beta", 1.0);
    return {verify::check_cov_equality(p.corr_or_identity("corr", dim), p.functional("f", beta),
                                       p.functional("g", beta), p.samples(), nodes, p.seed())};
  }
  return {verify::check_vardiff_identity(p.corr_or_identity("corr-x", dim), p.corr_or_identity("corr-y", dim),
                                         p.real("beta"), p.samples(), nodes, p.seed())};
}

inline std::vector<CheckReport> run_theorem(const RunConfig& cfg) {
  const ParamReader p(cfg);
  const std::string& name = cfg.name;
  const std::size_t n = p.samples();
  const std::uint64_t seed = p.seed();
  if (name == "thm-iid")
    return verify::check_thm_iid(p.count("n-dim"), p.real("beta"), p.index_or("i", 1), p.index_or("j", 2), n, seed);
  if (name == "bivariate") return {verify::check_bivariate_cov(p.real("rho"), p.real("beta"), n, seed)};
  if (name == "thm-rho")
    return verify::check_thm_rho(p.count("n-dim"), p.real("rho"), n, seed, p.flag("limit"),
                                 p.count_or("nodes", kDefaultQuadratureOrder));
  if (name == "i-constant")
    return verify::check_i_constant(p.count_or("n-dim", 3), p.real("rho"), p.real_or("theta", 1.0), n, seed);
  if (name == "key-max-05")
    return {verify::check_key_max_05(p.count("n-dim"), p.real("rho"), p.real_or("theta", 1.0), n, seed)};
  if (name == "lemma-a1") return {verify::check_lemma_a1(p.count("n-dim"), p.real("c11"), n, seed)};
  if (name == "decreasing") return verify::check_decreasing(p.count_or("n-max", 20), n, seed);
  if (name == "slepian") {
    const std::size_t dim = p.count("n-dim");
    return verify::check_slepian(p.corr_or_identity("corr-x", dim), p.corr_or_identity("corr-y", dim), n, seed,
                                 p.reals_or("u-grid", {-1.0, 0.0, 0.5, 1.0, 2.0}));
  }
  if (name == "harge") {
    const std::size_t dim = p.count("n-dim");
    return {verify::check_harge(p.corr_or_identity("corr", dim), p.functional("f", p.real_or("beta", 1.0)),
                                verify::parse_weight(p.text("weight")), n, seed, p.flag("strict"))};
  }
  if (name == "oddeven") return {verify::check_bivariate_oddeven(p.real("rho"), p.real("beta"), n, seed)};
  return verify::default_suite(n, seed);
}

inline std::vector<CheckReport> run_table(const RunConfig& cfg) {
  const ParamReader p(cfg);
  if (cfg.name == "i-constant") {
    const std::size_t dim = p.count_or("n-dim", 3);
    const double rho = p.real("rho"), theta = p.real_or("theta", 1.0);
    return verify::check_i_constant(dim, rho, theta, p.samples(), p.seed());
  }
  const std::size_t lo = p.count_or("n-min", 2), hi = p.count("n-max");
  if (lo < 1 || hi < lo) throw UsageError("need 1 <= --n-min <= --n-max");
  const std::size_t n = cfg.samples.value_or(0);
  std::vector<CheckReport> out;
  for (std::size_t d = lo; d <= hi; ++d) {
    const double v = var_max_oracle(d);
    Params params{{"N", verify::iparam(d)}, {"var_times_2logN", v * 2.0 * std::log(static_cast<double>(d))}};
    out.push_back(make_report("var-max", params, Estimate{v, 0.0, 0}, Target::none()));
    if (n > 0) {
      params["samples"] = verify::iparam(n);
      params["seed"] = verify::iparam(p.seed());
      out.push_back(make_report("var-max-mc", std::move(params),
                                mc_var(Functional::hard_max(), identity_spec(d), n, derive_seed(p.seed(), d)),
                                Target::equal(v)));
    }
  }
  return out;
}

inline std::vector<CheckReport> run_search(const RunConfig& cfg, std::ostream& diag) {
  const ParamReader p(cfg);
  explore::SearchOptions opt;
  opt.dim = p.count_or("n-dim", 3);
  opt.beta = p.real_or("beta", 1.0);
  opt.i = p.index_or("i", 1);
  opt.j = p.index_or("j", 2);
  opt.budget = p.count_or("budget", 200);
  opt.n_per_eval = p.samples(kDefaultSearchSamples);
  opt.seed = p.seed();
  const auto state = explore::search(opt);
  if (state.counterexample)
    diag << "COUNTEREXAMPLE: Cov(log S_N, p_i p_j) > 0 reproduced on " << state.replications.size()
         << " independent seeds at corr " << explore::describe_entries(state.best_spec.entries()) << '\n';
  return explore::search_reports(opt, state);
}

inline std::vector<CheckReport> dispatch(const RunConfig& cfg, std::ostream& diag) {
  if (cfg.command == "estimate") return run_estimate(cfg);
  if (cfg.command == "verify") return run_verify(cfg);
  if (cfg.command == "theorem") return run_theorem(cfg);
  if (cfg.command == "table") return run_table(cfg);
  return run_search(cfg, diag);
}

/// Runs the configured command, writes the records, and returns the exit code
/// for the combined verdict. Errors propagate to the caller.
inline int run(const RunConfig& cfg, std::ostream& diag = std::cerr) {
  validate(cfg);
  if (cfg.threads) set_thread_count(*cfg.threads);
  const auto reports = dispatch(cfg, diag);
  io::emit(reports, cfg.format, cfg.output);
  return exit_code(overall_verdict(reports));
}

/// Entry point shared by the binary and tests: parse, run, map errors to exit 1.
inline int main_entry(int argc, const char* const* argv, std::ostream& diag = std::cerr) {
  try {
    return run(parse_cli(argc, argv), diag);
  } catch (const HelpRequested& h) {
    std::cout << h.text;
    return kExitPass;
  } catch (const std::exception& e) {
    diag << "gcmax: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace gcmax::cli
