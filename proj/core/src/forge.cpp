#include "sentinel/forge.hpp"

#include "sentinel/text.hpp"

#include <algorithm>
#include <stdexcept>

namespace sentinel {

std::string_view to_string(IssueState state) {
    switch (state) {
    case IssueState::Open: return "open";
    case IssueState::Resolved: return "resolved";
    case IssueState::Unknown: return "unknown";
    }
    return "unknown";
}

IssueState parse_issue_state(std::string_view text) {
    const auto s = text::to_lower_ascii(text);
    if (s == "open") return IssueState::Open;
    if (s == "resolved" || s == "closed") return IssueState::Resolved;
    return IssueState::Unknown;
}

PostTarget PostTarget::pull_request(RepoId repo, std::uint64_t number) {
    return {TargetKind::PullRequest, std::move(repo), number, {}};
}

PostTarget PostTarget::commit(RepoId repo, std::string sha) {
    return {TargetKind::Commit, std::move(repo), 0, std::move(sha)};
}

PostTarget PostTarget::new_issue(RepoId repo) { return {TargetKind::NewIssue, std::move(repo), 0, {}}; }

std::string PostTarget::to_string() const {
    const std::string repo_name = repo.host + "/" + repo.full_name();
    switch (kind) {
    case TargetKind::PullRequest: return "pr:" + repo_name + "#" + std::to_string(number);
    case TargetKind::Commit: return "commit:" + repo_name + "@" + sha;
    case TargetKind::NewIssue: return "issue:" + repo_name;
    }
    return {};
}

PostTarget PostTarget::parse(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("bad post target: " + std::string(text));
    const auto kind = text.substr(0, colon);
    auto rest = text.substr(colon + 1);
    if (kind == "issue") return new_issue(RepoId::parse(rest));
    if (kind == "pr") {
        auto hash = rest.rfind('#');
        if (hash == std::string_view::npos) throw std::invalid_argument("bad post target: " + std::string(text));
        return pull_request(RepoId::parse(rest.substr(0, hash)), std::stoull(std::string(rest.substr(hash + 1))));
    }
    if (kind == "commit") {
        auto at = rest.rfind('@');
        if (at == std::string_view::npos) throw std::invalid_argument("bad post target: " + std::string(text));
        return commit(RepoId::parse(rest.substr(0, at)), std::string(rest.substr(at + 1)));
    }
    throw std::invalid_argument("bad post target: " + std::string(text));
}

void PostTarget::validate() const {
    if (kind == TargetKind::PullRequest && number < 1)
        throw std::invalid_argument("pull request number must be >= 1");
    if (kind == TargetKind::Commit && !text::is_hex_sha(sha))
        throw std::invalid_argument("commit sha must be 40 lowercase hex characters");
}

std::pair<std::string, bool> fit_body(std::string_view body) {
    if (body.size() <= kMaxBodyChars) return {std::string(body), false};
    static constexpr std::string_view kNotice = "\n\n_(truncated: body exceeded the size limit)_\n";
    std::size_t cut = kMaxBodyChars - kNotice.size();
    // Back off to a UTF-8 lead byte.
    while (cut > 0 && (static_cast<unsigned char>(body[cut]) & 0xC0) == 0x80) --cut;
    std::string out(body.substr(0, cut));
    out += kNotice;
    return {out, true};
}

std::vector<std::string> push_paths(const PushChange& push) {
    std::vector<std::string> order;
    auto add = [&](const std::string& p) {
        if (std::find(order.begin(), order.end(), p) == order.end()) order.push_back(p);
    };
    for (const auto& c : push.commits) {
        for (const auto& p : c.added) add(p);
        for (const auto& p : c.modified) add(p);
        for (const auto& p : c.removed) order.erase(std::remove(order.begin(), order.end(), p), order.end());
    }
    return order;
}

} // namespace sentinel
