#pragma once

// Path-aware accessors for validating JSON documents. Every failure raises
// SchemaError whose message starts with the dotted path of the bad field.

#include <cmath>
#include <string>

#include <json.hpp>

#include "driftwatch/errors.hpp"
#include "driftwatch/geometry.hpp"

namespace driftwatch::detail {

using nlohmann::json;

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
  throw SchemaError((path.empty() ? std::string("<root>") : path) + ": " + what);
}

inline const json& require(const json& obj, const std::string& parent, const char* key) {
  if (!obj.is_object()) {
    schema_fail(parent, "expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    schema_fail(join_path(parent, key), "required field missing");
  }
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) {
    schema_fail(path, "expected a number");
  }
  double d = v.get<double>();
  if (!std::isfinite(d)) {
    schema_fail(path, "expected a finite number");
  }
  return d;
}

inline std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) {
    schema_fail(path, "expected an integer");
  }
  return v.get<std::int64_t>();
}

inline std::size_t as_count(const json& v, const std::string& path) {
  auto i = as_int(v, path);
  if (i < 0) {
    schema_fail(path, "expected a non-negative integer");
  }
  return static_cast<std::size_t>(i);
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) {
    schema_fail(path, "expected a string");
  }
  return v.get<std::string>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) {
    schema_fail(path, "expected an array");
  }
  return v;
}

inline double number_or(const json& obj, const std::string& parent, const char* key, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, join_path(parent, key));
}

inline std::string string_or(const json& obj, const std::string& parent, const char* key, std::string fallback) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? fallback : as_string(*it, join_path(parent, key));
}

inline json rect_to_json(const RectMask& r) { return json::array({r.x_min, r.y_min, r.x_max, r.y_max}); }

inline RectMask rect_from_json(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) {
    schema_fail(path, "expected [x_min, y_min, x_max, y_max]");
  }
  RectMask r{as_number(v[0], index_path(path, 0)), as_number(v[1], index_path(path, 1)),
             as_number(v[2], index_path(path, 2)), as_number(v[3], index_path(path, 3))};
  if (!r.valid()) {
    schema_fail(path, "min corner exceeds max corner");
  }
  return r;
}

inline json point_to_json(const Point2& p) { return json::array({p.x, p.y}); }

inline Point2 point_from_json(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) {
    schema_fail(path, "expected [x, y]");
  }
  return {as_number(v[0], index_path(path, 0)), as_number(v[1], index_path(path, 1))};
}

// Rejects NaN/inf anywhere in a document about to be written.
inline void require_finite(const json& v, const std::string& path) {
  if (v.is_number_float() && !std::isfinite(v.get<double>())) {
    throw InputError(path + ": non-finite number cannot be serialized");
  }
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      require_finite(it.value(), join_path(path, it.key()));
    }
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      require_finite(v[i], index_path(path, i));
    }
  }
}

inline json parse_document(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(what + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace driftwatch::detail
