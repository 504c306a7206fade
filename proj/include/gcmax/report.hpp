#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gcmax/correlation.hpp"
#include "gcmax/error.hpp"
#include "gcmax/estimators.hpp"

namespace gcmax {

enum class Verdict { Pass, Fail, Indeterminate };

/// What the estimate is compared against.
///   Equal         |v - t| <= max(z se, slack)            pass / fail
///   LessEqual     v + z se <= t pass, v - z se > t fail   otherwise indeterminate
///   GreaterEqual  mirror image of LessEqual
///   Less          v + z se < t                           pass / fail
///   Greater       v - z se > t                           pass / fail
///   AtMost        v <= t + max(z se, slack)              pass / fail
///   AtLeast       v >= t - max(z se, slack)              pass / fail
///   None          reported value only, always pass
enum class Relation { None, Equal, LessEqual, GreaterEqual, Less, Greater, AtMost, AtLeast };

struct Target {
  Relation relation = Relation::None;
  double value = 0.0;
  double slack = 0.0;

  static Target none() { return {}; }
  static Target equal(double v, double slack = 0.0) { return {Relation::Equal, v, slack}; }
  static Target less_equal(double v) { return {Relation::LessEqual, v, 0.0}; }
  static Target greater_equal(double v) { return {Relation::GreaterEqual, v, 0.0}; }
  static Target less(double v) { return {Relation::Less, v, 0.0}; }
  static Target greater(double v) { return {Relation::Greater, v, 0.0}; }
  static Target at_most(double v, double slack = 0.0) { return {Relation::AtMost, v, slack}; }
  static Target at_least(double v, double slack = 0.0) { return {Relation::AtLeast, v, slack}; }

  bool operator==(const Target&) const = default;
};

using ParamValue = std::variant<std::uint64_t, double, std::string>;
using Params = std::map<std::string, ParamValue>;

struct CheckReport {
  std::string check_id;
  Params params;
  Estimate estimate;
  Target target;
  std::string tolerance_policy;
  Verdict verdict = Verdict::Pass;

  bool operator==(const CheckReport&) const = default;
};

inline Verdict judge(const Estimate& e, const Target& t) {
  const double band = e.confidence_z * e.std_error;
  const double lo = e.value - band, hi = e.value + band;
  auto pass_if = [](bool ok) { return ok ? Verdict::Pass : Verdict::Fail; };
  switch (t.relation) {
    case Relation::None:
      return Verdict::Pass;
    case Relation::Equal:
      return pass_if(std::abs(e.value - t.value) <= std::max(band, t.slack));
    case Relation::LessEqual:
      if (hi <= t.value) return Verdict::Pass;
      return lo > t.value ? Verdict::Fail : Verdict::Indeterminate;
    case Relation::GreaterEqual:
      if (lo >= t.value) return Verdict::Pass;
      return hi < t.value ? Verdict::Fail : Verdict::Indeterminate;
    case Relation::Less:
      return pass_if(hi < t.value);
    case Relation::Greater:
      return pass_if(lo > t.value);
    case Relation::AtMost:
      return pass_if(e.value <= t.value + std::max(band, t.slack));
    case Relation::AtLeast:
      return pass_if(e.value >= t.value - std::max(band, t.slack));
  }
  return Verdict::Fail;
}

inline Verdict overall_verdict(std::span<const CheckReport> reports) {
  bool indeterminate = false;
  for (const auto& r : reports) {
    if (r.verdict == Verdict::Fail) return Verdict::Fail;
    if (r.verdict == Verdict::Indeterminate) indeterminate = true;
  }
  return indeterminate ? Verdict::Indeterminate : Verdict::Pass;
}

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

inline Verdict parse_verdict(std::string_view s) {
  if (s == "pass") return Verdict::Pass;
  if (s == "fail") return Verdict::Fail;
  if (s == "indeterminate") return Verdict::Indeterminate;
  throw InvalidArgument("unknown verdict '" + std::string(s) + "'");
}

namespace detail {

struct RelationName {
  Relation relation;
  std::string_view text;
};

inline constexpr RelationName kRelationNames[] = {
    {Relation::Equal, "="},        {Relation::LessEqual, "<="},     {Relation::GreaterEqual, ">="},
    {Relation::Less, "<"},         {Relation::Greater, ">"},        {Relation::AtMost, "at-most"},
    {Relation::AtLeast, "at-least"},
};

}  // namespace detail

/// "none", "<= 0", "= 0.5 slack 0.01", ...
inline std::string to_string(const Target& t) {
  if (t.relation == Relation::None) return "none";
  std::string out;
  for (const auto& rn : detail::kRelationNames)
    if (rn.relation == t.relation) out = std::string(rn.text);
  out += " " + format_double(t.value);
  if (t.slack != 0.0) out += " slack " + format_double(t.slack);
  return out;
}

inline Target parse_target(std::string_view s) {
  if (s == "none") return Target::none();
  const auto space = s.find(' ');
  if (space == std::string_view::npos) throw InvalidArgument("bad target '" + std::string(s) + "'");
  Target t;
  bool found = false;
  for (const auto& rn : detail::kRelationNames)
    if (rn.text == s.substr(0, space)) {
      t.relation = rn.relation;
      found = true;
    }
  if (!found) throw InvalidArgument("bad target relation in '" + std::string(s) + "'");
  std::string_view rest = s.substr(space + 1);
  const auto slack = rest.find(" slack ");
  if (slack != std::string_view::npos) {
    t.slack = parse_double(rest.substr(slack + 7));
    rest = rest.substr(0, slack);
  }
  t.value = parse_double(rest);
  return t;
}

/// Human-readable rule that produced the verdict.
inline std::string tolerance_policy(const Target& t, double z = kConfidenceZ) {
  const std::string zs = format_double(z);
  switch (t.relation) {
    case Relation::None: return "reported only";
    case Relation::Equal:
      return t.slack > 0.0 ? "pass iff |estimate - target| <= max(" + zs + " se, slack)"
                           : "pass iff |estimate - target| <= " + zs + " se";
    case Relation::LessEqual:
      return "pass if estimate + " + zs + " se <= target; fail if estimate - " + zs +
             " se > target; else indeterminate";
    case Relation::GreaterEqual:
      return "pass if estimate - " + zs + " se >= target; fail if estimate + " + zs +
             " se < target; else indeterminate";
    case Relation::Less: return "pass iff estimate + " + zs + " se < target";
    case Relation::Greater: return "pass iff estimate - " + zs + " se > target";
    case Relation::AtMost: return "pass iff estimate <= target + max(" + zs + " se, slack)";
    case Relation::AtLeast: return "pass iff estimate >= target - max(" + zs + " se, slack)";
  }
  return "?";
}

inline CheckReport make_report(std::string check_id, Params params, const Estimate& estimate, const Target& target) {
  CheckReport r;
  r.check_id = std::move(check_id);
  r.params = std::move(params);
  r.estimate = estimate;
  r.target = target;
  r.tolerance_policy = tolerance_policy(target, estimate.confidence_z);
  r.verdict = judge(estimate, target);
  return r;
}

/// Off-diagonal entries as "i,j,value;..." (one-based), or "identity".
inline std::string describe_correlation(const CorrelationSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.dim(); ++i)
    for (std::size_t j = i + 1; j < spec.dim(); ++j)
      if (spec(i, j) != 0.0) {
        if (!out.empty()) out += ';';
        out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + format_double(spec(i, j));
      }
  return out.empty() ? "identity" : out;
}

/// Parses the form produced by describe_correlation; indices one-based.
inline std::vector<OffDiagonal> parse_off_diagonals(std::string_view text) {
  std::vector<OffDiagonal> out;
  if (text.empty() || text == "identity") return out;
  while (!text.empty()) {
    const auto semi = text.find(';');
    const std::string_view item = text.substr(0, semi);
    text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
    const auto c1 = item.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : item.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw InvalidArgument("correlation entries look like 'i,j,value': got '" + std::string(item) + "'");
    auto index = [&](std::string_view s) {
      std::size_t v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v == 0)
        throw IndexError("bad index '" + std::string(s) + "' in correlation entry");
      return v - 1;
    };
    out.push_back({index(item.substr(0, c1)), index(item.substr(c1 + 1, c2 - c1 - 1)),
                   parse_double(item.substr(c2 + 1))});
  }
  return out;
}

}  // namespace gcmax
