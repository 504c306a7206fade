#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gcmax/emit.hpp"
#include "gcmax/error.hpp"

// Run configuration shared by the command line and INI config files.
//
//   command = theorem
//   name = thm-iid
//   seed = 7
//   samples = 1000000
//
//   [theorem]
//   n-dim = 3
//   beta = 1
namespace gcmax::cli {

inline constexpr std::array<std::string_view, 5> kCommands{"estimate", "verify", "theorem", "table", "search"};

/// Per-command parameter keys; each is also a long flag (--n-dim, ...).
inline constexpr std::array<std::string_view, 21> kParamKeys{
    "n-dim", "beta",  "rho",    "theta", "b",      "i",      "j",      "c11",   "n-min", "n-max",  "budget",
    "nodes", "f",     "g",      "weight", "corr",  "corr-x", "corr-y", "u-grid", "limit", "strict"};

inline constexpr std::array<std::string_view, 7> kTopLevelKeys{"command", "name",   "seed",  "samples",
                                                               "threads", "format", "output"};

inline bool is_command(std::string_view s) {
  return std::find(kCommands.begin(), kCommands.end(), s) != kCommands.end();
}

inline bool is_param_key(std::string_view s) {
  return std::find(kParamKeys.begin(), kParamKeys.end(), s) != kParamKeys.end();
}

struct RunConfig {
  std::string command;
  std::string name;
  std::uint64_t seed = 1;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> threads;
  io::Format format = io::Format::Csv;
  std::string output;  // empty: standard output
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) > 0; }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <class T>
T parse_unsigned(std::string_view key, std::string_view text) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw UsageError(std::string(key) + " must be a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

}  // namespace detail

/// Applies one top-level key. Shared by the config reader and flag overlay.
inline void set_top_level(RunConfig& cfg, std::string_view key, const std::string& value) {
  if (key == "command") cfg.command = value;
  else if (key == "name") cfg.name = value;
  else if (key == "seed") cfg.seed = detail::parse_unsigned<std::uint64_t>(key, value);
  else if (key == "samples") cfg.samples = detail::parse_unsigned<std::size_t>(key, value);
  else if (key == "threads") cfg.threads = detail::parse_unsigned<std::size_t>(key, value);
  else if (key == "format") cfg.format = io::parse_format(value);
  else if (key == "output") cfg.output = value;
  else throw UsageError("unknown config key '" + std::string(key) + "'");
}

/// Parses INI text. Unknown keys and sections are rejected. Only the section
/// named after the configured command contributes parameters; other command
/// sections are validated but ignored.
inline RunConfig parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("invalid config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  std::map<std::string, std::map<std::string, std::string>> sections;
  for (const auto& [key, node] : tree) {
    if (node.empty() && !(is_command(key) && node.data().empty())) {
      set_top_level(cfg, key, node.data());
      continue;
    }
    if (!is_command(key)) throw UsageError("unknown config section [" + key + "]");
    for (const auto& [k, v] : node) {
      if (!v.empty()) throw UsageError("nested keys are not supported in [" + key + "]");
      if (!is_param_key(k)) throw UsageError("unknown key '" + k + "' in section [" + key + "]");
      sections[key][k] = v.data();
    }
  }
  if (auto it = sections.find(cfg.command); it != sections.end()) cfg.params = it->second;
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

/// Inverse of parse_config_text.
inline std::string write_config_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "command = " << cfg.command << '\n';
  if (!cfg.name.empty()) os << "name = " << cfg.name << '\n';
  os << "seed = " << cfg.seed << '\n';
  if (cfg.samples) os << "samples = " << *cfg.samples << '\n';
  if (cfg.threads) os << "threads = " << *cfg.threads << '\n';
  os << "format = " << io::to_string(cfg.format) << '\n';
  if (!cfg.output.empty()) os << "output = " << cfg.output << '\n';
  if (!cfg.params.empty()) {
    os << "\n[" << cfg.command << "]\n";
    for (const auto& [k, v] : cfg.params) os << k << " = " << v << '\n';
  }
  return os.str();
}

}  // namespace gcmax::cli
