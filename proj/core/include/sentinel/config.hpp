#pragma once

#include "sentinel/classify.hpp"
#include "sentinel/clock.hpp"
#include "sentinel/comments.hpp"
#include "sentinel/issue_refs.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

enum class Channel { PullRequestComment, CommitComment, IssueCreation };

std::string_view to_string(Channel channel);
/// Accepts the canonical names and snake_case ("pull_request_comment").
Channel parse_channel(std::string_view text);

struct RepoConfig {
    RepoId repo;
    std::vector<std::string> branches;
    std::set<Channel> output_channels;
    std::vector<RefPattern> user_ref_patterns;  // compiled at load
    std::vector<std::string> user_onhold_patterns;
    OnHoldPatterns onhold;                      // compiled from user_onhold_patterns
    Millis poll_interval{std::chrono::minutes(15)};
    double confidence_floor = 0.0;
    std::optional<std::filesystem::path> model_path;
    /// Only issues closed as "completed" count as resolved.
    bool require_completed = false;

    /// Built-in plus user reference patterns, in matching priority order.
    [[nodiscard]] std::vector<RefPattern> ref_patterns() const;
    [[nodiscard]] bool monitors(std::string_view branch) const;
    [[nodiscard]] bool enabled(Channel channel) const { return output_channels.contains(channel); }

    /// Throws ConfigError on a violated invariant.
    void validate() const;
};

struct ServiceConfig {
    std::string bind_address = "127.0.0.1";
    int port = 8080;
    std::filesystem::path store_path = "satd-sentinel.db";
    std::string token_env = "SATD_SENTINEL_TOKEN";
    std::string webhook_secret_env = "SATD_SENTINEL_WEBHOOK_SECRET";
    std::string api_base = "https://api.github.com";
    std::optional<std::filesystem::path> model_path;
    int workers = 2;
    Millis request_interval{250};
    Millis full_scan_interval{std::chrono::hours(24 * 7)};
    Millis reservation_timeout{std::chrono::minutes(10)};
    std::vector<LanguageProfile> profiles; // java_profile() unless overridden
    std::vector<RepoConfig> repos;

    [[nodiscard]] const RepoConfig* find_repo(const RepoId& repo) const;
    void validate() const;
};

/// Parses "90s", "15m", "2h", "7d", "250ms" or a bare number of seconds.
Millis parse_duration(std::string_view text);

/// Parses a config document. `//` and `/* */` comments are allowed.
/// Relative paths resolve against `base_dir`.
ServiceConfig parse_service_config(std::string_view text, const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& path);

} // namespace sentinel
