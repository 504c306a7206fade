#pragma once

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcmax/error.hpp"
#include "gcmax/report.hpp"

// CSV and JSON serialization of CheckReport lists. Both are byte-stable for a
// fixed input; JSON also parses back to identical reports.
namespace gcmax::io {

enum class Format { Csv, Json };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw UsageError("format must be csv or json, got '" + std::string(s) + "'");
}

inline std::string_view to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

inline std::string param_text(const ParamValue& v) {
  if (const auto* i = std::get_if<std::uint64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  return std::get<std::string>(v);
}

/// RFC 4180 quoting: fields with a comma, quote, or line break are quoted.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Header: check_id, sorted union of parameter keys, estimate, std_error, n,
/// target, verdict. Absent parameters are empty cells.
inline void write_csv(std::ostream& os, const std::vector<CheckReport>& reports) {
  std::set<std::string> keys;
  for (const auto& r : reports)
    for (const auto& [k, v] : r.params) keys.insert(k);
  std::string line = "check_id";
  for (const auto& k : keys) line += "," + csv_field(k);
  os << line << ",estimate,std_error,n,target,verdict\r\n";
  for (const auto& r : reports) {
    line = csv_field(r.check_id);
    for (const auto& k : keys) {
      line += ',';
      if (auto it = r.params.find(k); it != r.params.end()) line += csv_field(param_text(it->second));
    }
    line += "," + format_double(r.estimate.value) + "," + format_double(r.estimate.std_error) + "," +
            std::to_string(r.estimate.n) + "," + csv_field(to_string(r.target)) + "," +
            std::string(to_string(r.verdict));
    os << line << "\r\n";
  }
}

inline nlohmann::ordered_json to_json(const CheckReport& r) {
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.params) std::visit([&, key = k](const auto& x) { params[key] = x; }, v);
  nlohmann::ordered_json j;
  j["check_id"] = r.check_id;
  j["params"] = std::move(params);
  j["estimate"] = r.estimate.value;
  j["std_error"] = r.estimate.std_error;
  j["n"] = r.estimate.n;
  j["confidence_z"] = r.estimate.confidence_z;
  j["target"] = to_string(r.target);
  j["tolerance_policy"] = r.tolerance_policy;
  j["verdict"] = to_string(r.verdict);
  return j;
}

inline CheckReport from_json(const nlohmann::ordered_json& j) {
  try {
    CheckReport r;
    r.check_id = j.at("check_id").get<std::string>();
    for (const auto& [k, v] : j.at("params").items()) {
      if (v.is_number_unsigned()) r.params[k] = v.get<std::uint64_t>();
      else if (v.is_number_float()) r.params[k] = v.get<double>();
      else if (v.is_string()) r.params[k] = v.get<std::string>();
      else throw InvalidArgument("parameter '" + k + "' has an unsupported type");
    }
    r.estimate.value = j.at("estimate").get<double>();
    r.estimate.std_error = j.at("std_error").get<double>();
    r.estimate.n = j.at("n").get<std::size_t>();
    r.estimate.confidence_z = j.at("confidence_z").get<double>();
    r.target = parse_target(j.at("target").get<std::string>());
    r.tolerance_policy = j.at("tolerance_policy").get<std::string>();
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed report: ") + e.what());
  }
}

inline void write_json(std::ostream& os, const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  os << arr.dump(2) << '\n';
}

inline std::vector<CheckReport> read_json(std::istream& is) {
  nlohmann::ordered_json arr;
  try {
    arr = nlohmann::ordered_json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
  if (!arr.is_array()) throw InvalidArgument("expected a JSON array of reports");
  std::vector<CheckReport> out;
  for (const auto& j : arr) out.push_back(from_json(j));
  return out;
}

inline void write(std::ostream& os, const std::vector<CheckReport>& reports, Format format) {
  if (format == Format::Csv) write_csv(os, reports);
  else write_json(os, reports);
}

inline std::string to_text(const std::vector<CheckReport>& reports, Format format) {
  std::ostringstream os;
  write(os, reports, format);
  return os.str();
}

/// Writes to `path`, or to standard output when the path is empty or "-".
inline void emit(const std::vector<CheckReport>& reports, Format format, const std::string& path) {
  if (path.empty() || path == "-") {
    write(std::cout, reports, format);
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write(f, reports, format);
  f.flush();
  if (!f) throw IoError("write to '" + path + "' failed");
}

}  // namespace gcmax::io
