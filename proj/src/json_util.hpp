#pragma once

#include <cstdint>
#include <string>

#include "canids/can_core.hpp"
#include "canids/error.hpp"
#include "json.hpp"

namespace canids::detail {

using nlohmann::json;

[[noreturn]] inline void json_fail(const std::string& pointer, const std::string& what) {
  throw Error((pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

inline const json& require(const json& obj, const std::string& key, const std::string& pointer) {
  if (!obj.is_object()) json_fail(pointer, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) json_fail(pointer + "/" + key, "missing field");
  return *it;
}

inline double number_at(const json& v, const std::string& pointer) {
  if (!v.is_number()) json_fail(pointer, "expected number");
  return v.get<double>();
}

inline std::uint64_t uint_at(const json& v, const std::string& pointer) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 && !v.is_number_unsigned()))
    json_fail(pointer, "expected non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string string_at(const json& v, const std::string& pointer) {
  if (!v.is_string()) json_fail(pointer, "expected string");
  return v.get<std::string>();
}

inline bool bool_at(const json& v, const std::string& pointer) {
  if (!v.is_boolean()) json_fail(pointer, "expected boolean");
  return v.get<bool>();
}

// Ids are accepted as hex strings ("0x2A5") or plain integers.
inline CanId id_at(const json& v, const std::string& pointer) {
  try {
    if (v.is_string()) return parse_can_id(v.get<std::string>());
    return CanId(static_cast<unsigned>(uint_at(v, pointer)));
  } catch (const Error& e) {
    if (std::string(e.what()).starts_with("/")) throw;
    json_fail(pointer, e.what());
  }
}

inline std::string id_json(CanId id) { return "0x" + id.hex(); }

}  // namespace canids::detail
