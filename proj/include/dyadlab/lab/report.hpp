#pragma once

// Experiment reports: ordered rows, suite aggregates, verdicts, and CSV/JSON output.

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dyadlab/errors.hpp"
#include "dyadlab/lab/config.hpp"

namespace dyadlab::lab {

using Row = nlohmann::ordered_json;

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

struct Verdict {
  std::string name;
  bool passed = false;
  double value = 0.0;  // observed worst case
  double bound = 0.0;  // threshold it was held against
  std::string rule;    // human-readable comparison
};

struct LabReport {
  std::string experiment;
  Json config;
  std::vector<std::string> columns;  // CSV column order
  std::vector<Row> rows;
  Row aggregates = Row::object();
  std::vector<Verdict> verdicts;

  bool passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
  }

  const Verdict& verdict(const std::string& name) const {
    for (const Verdict& v : verdicts) {
      if (v.name == name) return v;
    }
    throw Error("no verdict named " + name);
  }
};

inline Row version_stamp() {
  Row v;
  v["dyadlab"] = kLibraryVersion;
#if defined(__clang__)
  v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = std::string("gcc ") + __VERSION__;
#else
  v["compiler"] = "unknown";
#endif
  v["cplusplus"] = static_cast<long>(__cplusplus);
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  return v;
}

/// Verdict "value ≤ bound".
inline Verdict at_most(std::string name, double value, double bound) {
  return {std::move(name), value <= bound, value, bound, "value <= bound"};
}

/// Verdict "value ≥ bound".
inline Verdict at_least(std::string name, double value, double bound) {
  return {std::move(name), value >= bound, value, bound, "value >= bound"};
}

inline Row to_json(const Verdict& v) {
  Row j;
  j["name"] = v.name;
  j["passed"] = v.passed;
  j["value"] = v.value;
  j["bound"] = v.bound;
  j["rule"] = v.rule;
  return j;
}

inline Row to_json(const LabReport& r) {
  Row j;
  j["schema"] = kReportSchema;
  j["experiment"] = r.experiment;
  j["config"] = Row::parse(r.config.dump());
  j["rows"] = r.rows;
  j["aggregates"] = r.aggregates;
  Row verdicts = Row::array();
  for (const Verdict& v : r.verdicts) verdicts.push_back(to_json(v));
  j["verdicts"] = std::move(verdicts);
  j["passed"] = r.passed();
  j["version"] = version_stamp();
  return j;
}

/// Shortest round-trip form of a double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_cell(const Row& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number() || v.is_boolean()) return v.dump();
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const LabReport& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  os << "\n";
  for (const Row& row : r.rows) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      os << (i ? "," : "");
      if (row.contains(r.columns[i])) os << csv_cell(row.at(r.columns[i]));
    }
    os << "\n";
  }
  return os.str();
}

inline std::string render(const LabReport& r, Format f) {
  return f == Format::csv ? to_csv(r) : to_json(r).dump(2) + "\n";
}

inline void write_report(const LabReport& r, const std::string& path, Format f) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << render(r, f);
  if (!out) throw ConfigError("write failed: " + path);
}

/// FNV-1a over the canonical JSON dump of an instance.
inline std::string inputs_hash(const Json& instance) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : instance.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// max and median of a column over rows that carry it.
inline Row column_stats(const std::vector<Row>& rows, const std::string& column) {
  std::vector<double> v;
  for (const Row& row : rows) {
    if (row.contains(column) && row.at(column).is_number()) v.push_back(row.at(column).get<double>());
  }
  Row out;
  out["count"] = v.size();
  if (v.empty()) return out;
  std::sort(v.begin(), v.end());
  out["min"] = v.front();
  out["max"] = v.back();
  const std::size_t n = v.size();
  out["median"] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  return out;
}

}  // namespace dyadlab::lab
