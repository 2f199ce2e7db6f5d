#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace velo {

/// Canonical serialization used for every JSON artifact: sorted keys
/// (nlohmann's default object is key-ordered), two-space indent, LF newlines,
/// trailing newline.
inline std::string canonical_json(const nlohmann::json& value) {
    return value.dump(2) + "\n";
}

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const nlohmann::json& value, const std::filesystem::path& path);

}  // namespace velo
