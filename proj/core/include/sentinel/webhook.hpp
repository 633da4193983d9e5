#pragma once

#include "sentinel/forge.hpp"
#include "sentinel/issue_refs.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

/// Header names compared case-insensitively.
class Headers {
public:
    void set(std::string_view name, std::string value);
    [[nodiscard]] std::optional<std::string> get(std::string_view name) const;

private:
    std::map<std::string, std::string> values_;
};

inline constexpr std::string_view kSignatureHeader = "X-Hub-Signature-256";
inline constexpr std::string_view kDeliveryHeader = "X-GitHub-Delivery";
inline constexpr std::string_view kEventHeader = "X-GitHub-Event";

/// "sha256=" + hex HMAC-SHA256 of `body` under `secret`.
std::string sign_payload(std::string_view secret, std::string_view body);

/// Constant-time check of a `X-Hub-Signature-256` value.
bool verify_signature(std::string_view secret, std::string_view body, std::string_view header_value);

enum class WebhookKind { Push, PullRequest, Ping, Ignored };

struct WebhookEvent {
    WebhookKind kind = WebhookKind::Ignored;
    RepoId repo;
    std::string delivery_id;
    std::string branch;          // push: ref without refs/heads/; PR: base branch when present
    PushChange push;             // Push
    PullRequestChange pull;      // PullRequest
    std::string action;          // PullRequest
    std::string ignored_reason;  // Ignored
};

/// Parses a verified payload. Throws std::invalid_argument when a required
/// field is missing or mistyped.
WebhookEvent parse_webhook(std::string_view event_name, std::string_view body, std::string delivery_id,
                           std::string_view default_host = "github.com");

/// Payload builders used by the harness and tests; field names follow GitHub.
std::string make_push_payload(const RepoId& repo, std::string_view branch, std::string_view before,
                              std::string_view after, const std::vector<CommitFiles>& commits);
std::string make_pull_request_payload(const RepoId& repo, std::string_view action, std::uint64_t number,
                                      std::string_view head_sha, std::string_view base_branch);

} // namespace sentinel
