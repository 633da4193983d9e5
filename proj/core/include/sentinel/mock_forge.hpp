#pragma once

#include "sentinel/clock.hpp"
#include "sentinel/forge.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace sentinel {

enum class ForgeOp { FetchIssueStatus, PostComment, CreateIssue, ListChangedFiles, ListTree, FindPost, FetchFile };
enum class FailureKind { Timeout, Http500, Http404 };

std::string_view to_string(ForgeOp op);
std::string_view to_string(FailureKind kind);
ForgeOp parse_forge_op(std::string_view text);
FailureKind parse_failure_kind(std::string_view text);

struct OutboxEntry {
    PostTarget target; // NewIssue targets carry the created issue number
    std::string title; // issues only
    std::string body;
    Timestamp posted_at = 0;
    std::string id;

    bool operator==(const OutboxEntry&) const = default;
};

/// In-process forge for hermetic tests. All members are synchronized so a
/// scenario can mutate it while service workers call into it.
class MockForge final : public Forge {
public:
    explicit MockForge(Clock& clock);

    IssueStatus fetch_issue_status(const IssueKey& key) override;
    PostReceipt post_comment(const PostTarget& target, std::string_view body) override;
    PostReceipt create_issue(const RepoId& repo, std::string_view title, std::string_view body) override;
    std::vector<ChangedFile> list_changed_files(const RepoId& repo, const ChangeRequest& change) override;
    std::vector<ChangedFile> list_tree(const RepoId& repo, std::string_view ref) override;
    std::optional<PostReceipt> find_post(const PostTarget& target, std::string_view marker) override;

    // Scenario controls.
    void seed_issue(const IssueKey& key, IssueState state, std::string title = {}, std::string body = {});
    void close_issue(const IssueKey& key, std::string reason = "completed");
    void reopen_issue(const IssueKey& key);

    /// Applies `changes` (path -> content, nullopt deletes) on top of
    /// `parent` (empty for a root commit) and returns the new commit sha.
    std::string commit(const RepoId& repo, const std::string& parent,
                       const std::map<std::string, std::optional<std::string>>& changes);
    /// Points `branch` at `sha`; list_tree accepts branch names as refs.
    void set_branch(const RepoId& repo, const std::string& branch, const std::string& sha);
    void open_pull_request(const RepoId& repo, std::uint64_t number, const std::string& base_sha,
                           const std::string& head_sha);

    /// Head sha of an open pull request.
    [[nodiscard]] std::optional<std::string> pull_request_head(const RepoId& repo, std::uint64_t number) const;

    /// The next `count` calls of `op` fail as `kind`.
    void inject_failure(FailureKind kind, ForgeOp op, int count);

    [[nodiscard]] std::vector<OutboxEntry> outbox() const;
    [[nodiscard]] std::size_t call_count(ForgeOp op) const;
    [[nodiscard]] std::optional<std::string> file_at(const RepoId& repo, const std::string& sha,
                                                     const std::string& path) const;

    /// Appends every post to `path` (fsync'd JSON lines) and preloads any
    /// posts already recorded there, so the outbox survives a killed process.
    void attach_journal(const std::filesystem::path& path);

private:
    struct Issue {
        IssueState state = IssueState::Open;
        std::string title;
        std::string body;
        std::optional<Timestamp> closed_at;
        std::optional<std::string> close_reason;
    };
    struct PullRequest {
        std::string base_sha;
        std::string head_sha;
    };
    using Tree = std::map<std::string, std::string>;

    void maybe_fail(ForgeOp op); // caller holds mu_
    std::uint64_t next_issue_number(const RepoId& repo) const;
    void record(OutboxEntry entry);
    ChangedFile file_handle(const RepoId& repo, const std::string& sha, const std::string& path);

    Clock& clock_;
    mutable std::mutex mu_;
    std::map<IssueKey, Issue> issues_;
    std::map<std::pair<RepoId, std::uint64_t>, PullRequest> pulls_;
    std::map<std::pair<RepoId, std::string>, Tree> trees_;
    std::map<std::pair<RepoId, std::string>, std::string> branches_;
    std::map<ForgeOp, std::pair<FailureKind, int>> failures_;
    std::map<ForgeOp, std::size_t> calls_;
    std::vector<OutboxEntry> outbox_;
    std::uint64_t next_post_id_ = 1000;
    std::uint64_t commit_counter_ = 0;
    std::optional<std::filesystem::path> journal_;
};

} // namespace sentinel
