#pragma once

#include <cstddef>
#include <set>
#include <string>

#include <json.hpp>

#include "slimnet/errors.hpp"

namespace slimnet::detail {

using ordered_json = nlohmann::ordered_json;

inline void require_object(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

inline const ordered_json& require_field(const ordered_json& j, const std::string& key, const std::string& path) {
    require_object(j, path);
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key + ": missing required field");
    return *it;
}

inline std::size_t get_size(const ordered_json& j, const std::string& key, const std::string& path) {
    const auto& v = require_field(j, key, path);
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
        if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected a non-negative integer");
    }
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
        throw ConfigError(path + "." + key + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

inline std::size_t get_size_or(const ordered_json& j, const std::string& key, std::size_t fallback,
                               const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_size(j, key, path);
}

inline double get_double(const ordered_json& j, const std::string& key, const std::string& path) {
    const auto& v = require_field(j, key, path);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

inline double get_double_or(const ordered_json& j, const std::string& key, double fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_double(j, key, path);
}

inline std::string get_string(const ordered_json& j, const std::string& key, const std::string& path) {
    const auto& v = require_field(j, key, path);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline bool get_bool_or(const ordered_json& j, const std::string& key, bool fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

inline void reject_unknown_keys(const ordered_json& j, const std::set<std::string>& allowed, const std::string& path) {
    require_object(j, path);
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw ConfigError(path + "." + key + ": unexpected field");
    }
}

}  // namespace slimnet::detail
