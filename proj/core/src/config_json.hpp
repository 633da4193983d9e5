#pragma once

#include "sentinel/config.hpp"

#include <nlohmann/json.hpp>

namespace sentinel {

RepoConfig parse_repo_config(const nlohmann::json& doc);
ServiceConfig parse_service_document(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads a JSON document with comments permitted. Throws ConfigError.
nlohmann::json parse_json_with_comments(std::string_view text, std::string_view what);

} // namespace sentinel
