#include "sentinel/mock_forge.hpp"

#include "sentinel/text.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/hashing.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <stdexcept>

namespace sentinel {

using json = nlohmann::json;

std::string_view to_string(ForgeOp op) {
    switch (op) {
    case ForgeOp::FetchIssueStatus: return "fetch_issue_status";
    case ForgeOp::PostComment: return "post_comment";
    case ForgeOp::CreateIssue: return "create_issue";
    case ForgeOp::ListChangedFiles: return "list_changed_files";
    case ForgeOp::ListTree: return "list_tree";
    case ForgeOp::FindPost: return "find_post";
    case ForgeOp::FetchFile: return "fetch_file";
    }
    return "?";
}

std::string_view to_string(FailureKind kind) {
    switch (kind) {
    case FailureKind::Timeout: return "timeout";
    case FailureKind::Http500: return "http500";
    case FailureKind::Http404: return "http404";
    }
    return "?";
}

ForgeOp parse_forge_op(std::string_view s) {
    for (auto op : {ForgeOp::FetchIssueStatus, ForgeOp::PostComment, ForgeOp::CreateIssue, ForgeOp::ListChangedFiles,
                    ForgeOp::ListTree, ForgeOp::FindPost, ForgeOp::FetchFile})
        if (to_string(op) == s) return op;
    throw ConfigError("unknown forge operation '" + std::string(s) + "'");
}

FailureKind parse_failure_kind(std::string_view text) {
    const auto s = text::to_lower_ascii(text);
    for (auto k : {FailureKind::Timeout, FailureKind::Http500, FailureKind::Http404})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown failure kind '" + std::string(s) + "'");
}

MockForge::MockForge(Clock& clock) : clock_(clock) {}

void MockForge::maybe_fail(ForgeOp op) {
    ++calls_[op];
    auto it = failures_.find(op);
    if (it == failures_.end() || it->second.second <= 0) return;
    const FailureKind kind = it->second.first;
    if (--it->second.second == 0) failures_.erase(it);
    const std::string what = "injected " + std::string(to_string(kind)) + " on " + std::string(to_string(op));
    switch (kind) {
    case FailureKind::Timeout: throw TransportError(TransportError::Kind::Timeout, what);
    case FailureKind::Http500: throw TransportError(TransportError::Kind::ServerError, what);
    case FailureKind::Http404: throw ForgeError(404, what);
    }
}

IssueStatus MockForge::fetch_issue_status(const IssueKey& key) {
    std::lock_guard lock(mu_);
    IssueStatus status;
    status.key = key;
    try {
        maybe_fail(ForgeOp::FetchIssueStatus);
    } catch (const ForgeError&) {
        return status; // 404 -> Unknown
    }
    auto it = issues_.find(key);
    if (it == issues_.end()) return status;
    status.state = it->second.state;
    status.resolved_at = it->second.closed_at;
    status.close_reason = it->second.close_reason;
    status.bot_report = it->second.body.find(kReportMarker) != std::string::npos;
    return status;
}

void MockForge::record(OutboxEntry entry) {
    if (journal_) {
        json j{{"kind", static_cast<int>(entry.target.kind)},
               {"host", entry.target.repo.host},
               {"owner", entry.target.repo.owner},
               {"repo", entry.target.repo.repo},
               {"number", entry.target.number},
               {"sha", entry.target.sha},
               {"title", entry.title},
               {"body", entry.body},
               {"posted_at", entry.posted_at},
               {"id", entry.id}};
        const std::string line = j.dump() + "\n";
        const int fd = ::open(journal_->c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
        if (fd < 0) throw std::runtime_error("cannot open outbox journal");
        const auto written = ::write(fd, line.data(), line.size());
        ::fsync(fd);
        ::close(fd);
        if (written != static_cast<ssize_t>(line.size())) throw std::runtime_error("short outbox journal write");
    }
    outbox_.push_back(std::move(entry));
}

PostReceipt MockForge::post_comment(const PostTarget& target, std::string_view body) {
    target.validate();
    if (target.kind == TargetKind::NewIssue) throw std::invalid_argument("post_comment: NewIssue target");
    if (body.empty()) throw std::invalid_argument("comment body must be non-empty");
    std::lock_guard lock(mu_);
    maybe_fail(ForgeOp::PostComment);
    auto [fitted, truncated] = fit_body(body);
    const std::string id = std::to_string(next_post_id_++);
    record({target, {}, fitted, clock_.now(), id});
    return {id, "mock://" + target.to_string() + "/comments/" + id, truncated};
}

std::uint64_t MockForge::next_issue_number(const RepoId& repo) const {
    std::uint64_t max = 0;
    for (const auto& [key, _] : issues_)
        if (key.repo == repo) max = std::max(max, key.number);
    for (const auto& [key, _] : pulls_)
        if (key.first == repo) max = std::max(max, key.second);
    return max + 1;
}

PostReceipt MockForge::create_issue(const RepoId& repo, std::string_view title, std::string_view body) {
    if (title.empty()) throw std::invalid_argument("issue title must be non-empty");
    std::lock_guard lock(mu_);
    maybe_fail(ForgeOp::CreateIssue);
    auto [fitted, truncated] = fit_body(body);
    const std::uint64_t number = next_issue_number(repo);
    issues_[IssueKey{repo, number}] = Issue{IssueState::Open, std::string(title), fitted, {}, {}};
    PostTarget target = PostTarget::new_issue(repo);
    target.number = number;
    record({target, std::string(title), fitted, clock_.now(), std::to_string(number)});
    return {std::to_string(number), "mock://" + repo.full_name() + "/issues/" + std::to_string(number), truncated};
}

ChangedFile MockForge::file_handle(const RepoId& repo, const std::string& sha, const std::string& path) {
    return ChangedFile{path, [this, repo, sha, path] {
                           std::lock_guard lock(mu_);
                           maybe_fail(ForgeOp::FetchFile);
                           auto t = trees_.find({repo, sha});
                           if (t == trees_.end()) throw ScanError("unknown commit " + sha);
                           auto f = t->second.find(path);
                           if (f == t->second.end()) throw ScanError("no file " + path + " at " + sha);
                           return f->second;
                       }};
}

std::vector<ChangedFile> MockForge::list_changed_files(const RepoId& repo, const ChangeRequest& change) {
    std::lock_guard lock(mu_);
    maybe_fail(ForgeOp::ListChangedFiles);
    std::vector<ChangedFile> files;
    if (const auto* push = std::get_if<PushChange>(&change)) {
        if (!trees_.count({repo, push->after_sha}))
            throw ScanError("unknown commit " + push->after_sha + " in " + repo.full_name());
        for (const auto& p : push_paths(*push)) files.push_back(file_handle(repo, push->after_sha, p));
        return files;
    }
    const auto& pr = std::get<PullRequestChange>(change);
    auto it = pulls_.find({repo, pr.number});
    if (it == pulls_.end()) throw ScanError("unknown pull request #" + std::to_string(pr.number));
    const auto head = trees_.find({repo, pr.head_sha});
    if (head == trees_.end()) throw ScanError("unknown commit " + pr.head_sha);
    const auto base = trees_.find({repo, it->second.base_sha});
    for (const auto& [path, content] : head->second) {
        const bool changed = base == trees_.end() || !base->second.count(path) || base->second.at(path) != content;
        if (changed) files.push_back(file_handle(repo, pr.head_sha, path));
    }
    return files;
}

std::vector<ChangedFile> MockForge::list_tree(const RepoId& repo, std::string_view ref) {
    std::lock_guard lock(mu_);
    maybe_fail(ForgeOp::ListTree);
    std::string sha(ref);
    if (auto b = branches_.find({repo, sha}); b != branches_.end()) sha = b->second;
    const auto t = trees_.find({repo, sha});
    if (t == trees_.end()) throw ScanError("unknown ref " + std::string(ref));
    std::vector<ChangedFile> files;
    for (const auto& [path, _] : t->second) files.push_back(file_handle(repo, sha, path));
    return files;
}

void MockForge::set_branch(const RepoId& repo, const std::string& branch, const std::string& sha) {
    std::lock_guard lock(mu_);
    branches_[{repo, branch}] = sha;
}

std::optional<PostReceipt> MockForge::find_post(const PostTarget& target, std::string_view marker) {
    std::lock_guard lock(mu_);
    maybe_fail(ForgeOp::FindPost);
    for (const auto& e : outbox_) {
        const bool same_target = target.kind == TargetKind::NewIssue
                                     ? e.target.kind == TargetKind::NewIssue && e.target.repo == target.repo
                                     : e.target == target;
        if (same_target && e.body.find(marker) != std::string::npos) return PostReceipt{e.id, {}, false};
    }
    return std::nullopt;
}

void MockForge::seed_issue(const IssueKey& key, IssueState state, std::string title, std::string body) {
    std::lock_guard lock(mu_);
    Issue issue{state, std::move(title), std::move(body), {}, {}};
    if (state == IssueState::Resolved) {
        issue.closed_at = clock_.now();
        issue.close_reason = "completed";
    }
    issues_[key] = std::move(issue);
}

void MockForge::close_issue(const IssueKey& key, std::string reason) {
    std::lock_guard lock(mu_);
    auto& issue = issues_[key];
    issue.state = IssueState::Resolved;
    issue.closed_at = clock_.now();
    issue.close_reason = std::move(reason);
}

void MockForge::reopen_issue(const IssueKey& key) {
    std::lock_guard lock(mu_);
    auto& issue = issues_[key];
    issue.state = IssueState::Open;
    issue.closed_at.reset();
    issue.close_reason.reset();
}

std::string MockForge::commit(const RepoId& repo, const std::string& parent,
                              const std::map<std::string, std::optional<std::string>>& changes) {
    std::lock_guard lock(mu_);
    Tree tree;
    if (!parent.empty()) {
        auto it = trees_.find({repo, parent});
        if (it == trees_.end()) throw ScanError("unknown parent commit " + parent);
        tree = it->second;
    }
    std::string material = repo.full_name() + "\n" + parent + "\n" + std::to_string(++commit_counter_);
    for (const auto& [path, content] : changes) {
        if (content)
            tree[path] = *content;
        else
            tree.erase(path);
        material += "\n" + path + "\n" + content.value_or("<deleted>");
    }
    const std::string sha = sha256_hex(material).substr(0, 40);
    trees_[{repo, sha}] = std::move(tree);
    return sha;
}

void MockForge::open_pull_request(const RepoId& repo, std::uint64_t number, const std::string& base_sha,
                                  const std::string& head_sha) {
    std::lock_guard lock(mu_);
    pulls_[{repo, number}] = PullRequest{base_sha, head_sha};
}

std::optional<std::string> MockForge::pull_request_head(const RepoId& repo, std::uint64_t number) const {
    std::lock_guard lock(mu_);
    auto it = pulls_.find({repo, number});
    if (it == pulls_.end()) return std::nullopt;
    return it->second.head_sha;
}

void MockForge::inject_failure(FailureKind kind, ForgeOp op, int count) {
    std::lock_guard lock(mu_);
    if (count <= 0)
        failures_.erase(op);
    else
        failures_[op] = {kind, count};
}

std::vector<OutboxEntry> MockForge::outbox() const {
    std::lock_guard lock(mu_);
    return outbox_;
}

std::size_t MockForge::call_count(ForgeOp op) const {
    std::lock_guard lock(mu_);
    auto it = calls_.find(op);
    return it == calls_.end() ? 0 : it->second;
}

std::optional<std::string> MockForge::file_at(const RepoId& repo, const std::string& sha, const std::string& path) const {
    std::lock_guard lock(mu_);
    auto t = trees_.find({repo, sha});
    if (t == trees_.end()) return std::nullopt;
    auto f = t->second.find(path);
    if (f == t->second.end()) return std::nullopt;
    return f->second;
}

void MockForge::attach_journal(const std::filesystem::path& path) {
    std::lock_guard lock(mu_);
    journal_ = path;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) continue; // torn final line from a crash
        OutboxEntry e;
        e.target.kind = static_cast<TargetKind>(j.at("kind").get<int>());
        e.target.repo = RepoId{j.at("host"), j.at("owner"), j.at("repo")};
        e.target.number = j.at("number");
        e.target.sha = j.at("sha");
        e.title = j.at("title");
        e.body = j.at("body");
        e.posted_at = j.at("posted_at");
        e.id = j.at("id");
        next_post_id_ = std::max<std::uint64_t>(next_post_id_, std::stoull(e.id) + 1);
        if (e.target.kind == TargetKind::NewIssue)
            issues_[IssueKey{e.target.repo, e.target.number}] = Issue{IssueState::Open, e.title, e.body, {}, {}};
        outbox_.push_back(std::move(e));
    }
}

} // namespace sentinel
