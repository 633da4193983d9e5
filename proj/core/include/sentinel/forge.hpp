#pragma once

#include "sentinel/clock.hpp"
#include "sentinel/issue_refs.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sentinel {

/// Prefix of the hidden marker line the bot writes into everything it posts.
inline constexpr std::string_view kReportMarker = "<!-- satd-sentinel:report";

enum class IssueState { Open, Resolved, Unknown };

std::string_view to_string(IssueState state);
IssueState parse_issue_state(std::string_view text);

struct IssueStatus {
    IssueKey key;
    IssueState state = IssueState::Unknown;
    std::optional<Timestamp> resolved_at;
    std::optional<std::string> etag;
    std::optional<std::string> close_reason; // "completed", "not_planned", ...
    bool bot_report = false;                  // issue was opened by this bot
};

enum class TargetKind { PullRequest, Commit, NewIssue };

struct PostTarget {
    TargetKind kind = TargetKind::NewIssue;
    RepoId repo;
    std::uint64_t number = 0; // pull request number
    std::string sha;          // commit sha (40 hex)

    static PostTarget pull_request(RepoId repo, std::uint64_t number);
    static PostTarget commit(RepoId repo, std::string sha);
    static PostTarget new_issue(RepoId repo);

    /// Stable textual identity, used inside dedup keys.
    [[nodiscard]] std::string to_string() const;
    /// Inverse of to_string(). Throws std::invalid_argument.
    static PostTarget parse(std::string_view text);
    /// Throws std::invalid_argument when number/sha are malformed.
    void validate() const;

    bool operator==(const PostTarget&) const = default;
};

struct PostReceipt {
    std::string id;
    std::string url;
    bool truncated = false;
};

/// Largest comment/issue body a forge accepts, in characters.
inline constexpr std::size_t kMaxBodyChars = 65536;

/// Cuts `body` to fit kMaxBodyChars (on a UTF-8 boundary) and appends a notice.
std::pair<std::string, bool> fit_body(std::string_view body);

struct CommitFiles {
    std::vector<std::string> added;
    std::vector<std::string> modified;
    std::vector<std::string> removed;
};

struct PushChange {
    std::string after_sha;
    std::vector<CommitFiles> commits;
};

struct PullRequestChange {
    std::uint64_t number = 0;
    std::string head_sha;
};

using ChangeRequest = std::variant<PushChange, PullRequestChange>;

/// Added and modified paths across the commits of a push, in first-seen
/// order, minus paths a later commit removed.
std::vector<std::string> push_paths(const PushChange& push);

struct ChangedFile {
    std::string path;
    std::function<std::string()> fetch; // file content at the scanned sha
};

/// A code host: issue status reads and the three notification outputs.
class Forge {
public:
    virtual ~Forge() = default;

    /// Never throws for well-formed keys except TransportError (retryable);
    /// 4xx and parse failures map to IssueState::Unknown.
    virtual IssueStatus fetch_issue_status(const IssueKey& key) = 0;
    /// PullRequest or Commit targets.
    virtual PostReceipt post_comment(const PostTarget& target, std::string_view body) = 0;
    virtual PostReceipt create_issue(const RepoId& repo, std::string_view title, std::string_view body) = 0;
    virtual std::vector<ChangedFile> list_changed_files(const RepoId& repo, const ChangeRequest& change) = 0;
    /// Every file of the tree at `ref`, for full-branch reconciliation scans.
    virtual std::vector<ChangedFile> list_tree(const RepoId& repo, std::string_view ref) = 0;
    /// A previously posted comment or issue on `target` whose body contains `marker`.
    virtual std::optional<PostReceipt> find_post(const PostTarget& target, std::string_view marker) = 0;
};

/// Non-retryable rejection of a request (404 on post, 422 validation, ...).
class ForgeError : public std::runtime_error {
public:
    ForgeError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    [[nodiscard]] int status() const noexcept { return status_; }

private:
    int status_;
};

} // namespace sentinel
