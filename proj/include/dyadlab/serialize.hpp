#pragma once

// JSON form of step fields and sequences:
//   {"kind": ..., "depth": n, "d": d, "values": [...]}
// Matrices are flattened row-major. Sequence values are sparse
// {"level", "position", "value"} records.

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"
#include "dyadlab/sequences.hpp"
#include "dyadlab/weight.hpp"

namespace dyadlab {

using Json = nlohmann::json;

namespace detail {

inline Json value_to_json(double v) { return v; }

inline Json value_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Json value_to_json(const SymMatrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.dim() * m.dim()));
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j < m.dim(); ++j) out.push_back(m(i, j));
  }
  return out;
}

template <class T>
T value_from_json(const Json& j, int d);

template <>
inline double value_from_json<double>(const Json& j, int /*d*/) {
  if (!j.is_number()) throw ConfigError("expected a number");
  return j.get<double>();
}

template <>
inline Vector value_from_json<Vector>(const Json& j, int d) {
  const auto raw = j.get<std::vector<double>>();
  if (static_cast<int>(raw.size()) != d) throw ConfigError("vector value has wrong length");
  return Eigen::Map<const Vector>(raw.data(), d);
}

template <>
inline SymMatrix value_from_json<SymMatrix>(const Json& j, int d) {
  const auto raw = j.get<std::vector<double>>();
  if (static_cast<int>(raw.size()) != d * d) throw ConfigError("matrix value has wrong length");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) m(i, k) = raw[static_cast<std::size_t>(i * d + k)];
  }
  return SymMatrix(m);
}

template <class T>
constexpr const char* field_kind() {
  if constexpr (std::is_same_v<T, double>) {
    return "scalar";
  } else if constexpr (std::is_same_v<T, Vector>) {
    return "vector";
  } else {
    return "matrix";
  }
}

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

}  // namespace detail

template <class T>
Json to_json(const StepField<T>& field) {
  Json values = Json::array();
  for (const T& v : field.values()) values.push_back(detail::value_to_json(v));
  return {{"kind", detail::field_kind<T>()}, {"depth", field.depth()}, {"d", field.dim()},
          {"values", std::move(values)}};
}

inline Json to_json(const MatrixWeight& w) { return to_json(w.field()); }

inline Json to_json(const ScalarSequence& seq) {
  Json values = Json::array();
  for (const auto& [q, v] : seq.entries()) {
    values.push_back({{"level", q.level}, {"position", q.position}, {"value", v}});
  }
  return {{"kind", "scalar_sequence"}, {"depth", seq.depth()}, {"d", 1}, {"values", std::move(values)}};
}

inline Json to_json(const MatrixSequence& seq) {
  Json values = Json::array();
  for (const auto& [q, v] : seq.entries()) {
    values.push_back({{"level", q.level}, {"position", q.position}, {"value", detail::value_to_json(v)}});
  }
  return {{"kind", "matrix_sequence"}, {"depth", seq.depth()}, {"d", seq.dim()},
          {"values", std::move(values)}};
}

/// Parses a field; throws ConfigError on schema violations.
template <class T>
StepField<T> field_from_json(const Json& j) {
  try {
    if (j.contains("kind") && j.at("kind").get<std::string>() != detail::field_kind<T>()) {
      throw ConfigError(std::string("expected a ") + detail::field_kind<T>() + " field");
    }
    const int depth = detail::require(j, "depth").get<int>();
    const int d = detail::require(j, "d").get<int>();
    std::vector<T> values;
    for (const Json& v : detail::require(j, "values")) values.push_back(detail::value_from_json<T>(v, d));
    return StepField<T>(depth, std::move(values));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed field: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("malformed field: ") + e.what());
  }
}

inline MatrixWeight weight_from_json(const Json& j) {
  MatrixField field = field_from_json<SymMatrix>(j);
  try {
    return MatrixWeight(field);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid weight: ") + e.what());
  }
}

inline ScalarSequence scalar_sequence_from_json(const Json& j) {
  try {
    ScalarSequence seq(detail::require(j, "depth").get<int>());
    for (const Json& e : detail::require(j, "values")) {
      seq.set({e.at("level").get<int>(), e.at("position").get<int>()}, e.at("value").get<double>());
    }
    return seq;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed scalar sequence: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("malformed scalar sequence: ") + e.what());
  }
}

inline MatrixSequence matrix_sequence_from_json(const Json& j) {
  try {
    const int d = detail::require(j, "d").get<int>();
    MatrixSequence seq(detail::require(j, "depth").get<int>(), d);
    for (const Json& e : detail::require(j, "values")) {
      seq.set({e.at("level").get<int>(), e.at("position").get<int>()},
              detail::value_from_json<SymMatrix>(e.at("value"), d));
    }
    return seq;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed matrix sequence: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("malformed matrix sequence: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace dyadlab
