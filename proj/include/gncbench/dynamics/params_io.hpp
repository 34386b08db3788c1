#pragma once

#include "gncbench/dynamics/types.hpp"

#include <json.hpp>

#include <filesystem>

namespace gncbench {

/// Flat document: {"m", "inertia", "dl": [3], "dc": [3], "T": [9] row-major}.
nlohmann::ordered_json params_to_json(const DynamicParams& params);

/// Reads the parameter keys of a flat document; other keys are left to the
/// caller. Throws InvalidParams on missing keys, wrong arity or invalid values.
DynamicParams params_from_json(const nlohmann::ordered_json& doc);

void save_params(const std::filesystem::path& path, const DynamicParams& params);
DynamicParams load_params(const std::filesystem::path& path);

/// Parses a JSON file, throwing std::runtime_error with the path on failure.
nlohmann::ordered_json load_json(const std::filesystem::path& path);

}  // namespace gncbench
