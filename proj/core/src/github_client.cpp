#include "sentinel/github_client.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/text.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <charconv>
#include <ctime>

namespace sentinel {

namespace {

using json = nlohmann::json;

class HttplibTransport final : public HttpTransport {
public:
    HttplibTransport(const std::string& base_url, Millis timeout) : client_(base_url) {
        const auto secs = timeout.count() / 1000;
        const auto usecs = (timeout.count() % 1000) * 1000;
        client_.set_connection_timeout(secs, usecs);
        client_.set_read_timeout(secs, usecs);
        client_.set_write_timeout(secs, usecs);
    }

    HttpResponse send(const std::string& method, const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      const std::string& body) override {
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        httplib::Result res;
        if (method == "GET")
            res = client_.Get(path, h);
        else if (method == "POST")
            res = client_.Post(path, h, body, "application/json");
        else if (method == "PATCH")
            res = client_.Patch(path, h, body, "application/json");
        else
            throw std::invalid_argument("unsupported HTTP method " + method);
        if (!res) {
            const auto err = res.error();
            const auto kind = err == httplib::Error::Read || err == httplib::Error::Write ||
                                      err == httplib::Error::ConnectionTimeout
                                  ? TransportError::Kind::Timeout
                                  : TransportError::Kind::Connection;
            throw TransportError(kind, method + " " + path + ": " + httplib::to_string(err));
        }
        HttpResponse out;
        out.status = res->status;
        out.body = res->body;
        for (const auto& [k, v] : res->headers) out.headers[text::to_lower_ascii(k)] = v;
        return out;
    }

private:
    httplib::Client client_;
};

std::string repo_path(const RepoId& repo) { return "/repos/" + repo.owner + "/" + repo.repo; }

std::string url_encode_path(std::string_view path) {
    std::string out;
    for (unsigned char c : path) {
        if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

std::optional<Timestamp> parse_iso8601(const std::string& s) {
    std::tm tm{};
    if (strptime(s.c_str(), "%Y-%m-%dT%H:%M:%S", &tm) == nullptr) return std::nullopt;
    return static_cast<Timestamp>(timegm(&tm)) * 1000;
}

std::optional<std::int64_t> header_int(const HttpResponse& r, const std::string& name) {
    const auto it = r.headers.find(name);
    if (it == r.headers.end()) return std::nullopt;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc{}) return std::nullopt;
    return v;
}

void check_post_status(const HttpResponse& r, const std::string& what) {
    if (r.status == 401) throw CredentialError(what + ": authentication rejected (401)");
    if (r.status == 403) throw CredentialError(what + ": forbidden (403)");
    if (r.status >= 500) throw TransportError(TransportError::Kind::ServerError, what + ": HTTP " + std::to_string(r.status));
    if (r.status < 200 || r.status >= 300) throw ForgeError(r.status, what + ": HTTP " + std::to_string(r.status));
}

PostReceipt receipt_from(const HttpResponse& r, bool truncated, bool use_number) {
    const auto j = json::parse(r.body, nullptr, false);
    PostReceipt receipt;
    receipt.truncated = truncated;
    if (!j.is_discarded() && j.is_object()) {
        if (use_number && j.contains("number")) receipt.id = std::to_string(j["number"].get<std::uint64_t>());
        else if (j.contains("id") && j["id"].is_number()) receipt.id = std::to_string(j["id"].get<std::uint64_t>());
        receipt.url = j.value("html_url", "");
    }
    return receipt;
}

} // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url, Millis timeout) {
    return std::make_unique<HttplibTransport>(base_url, timeout);
}

GitHubClient::GitHubClient(GitHubOptions options, Clock& clock)
    : GitHubClient(options, clock, make_http_transport(options.api_base, options.timeout)) {}

GitHubClient::GitHubClient(GitHubOptions options, Clock& clock, std::unique_ptr<HttpTransport> transport)
    : options_(std::move(options)),
      clock_(clock),
      transport_(std::move(transport)),
      limiter_(clock, options_.min_interval) {}

HttpResponse GitHubClient::request(const std::string& method, const std::string& path, const std::string& body,
                                   const std::vector<std::pair<std::string, std::string>>& extra) {
    std::vector<std::pair<std::string, std::string>> headers{
        {"Accept", "application/vnd.github+json"},
        {"User-Agent", options_.user_agent},
        {"X-GitHub-Api-Version", "2022-11-28"},
    };
    if (!options_.token.empty()) headers.emplace_back("Authorization", "Bearer " + options_.token);
    for (const auto& h : extra) {
        std::erase_if(headers, [&](const auto& e) { return text::to_lower_ascii(e.first) == text::to_lower_ascii(h.first); });
        headers.push_back(h);
    }

    for (int attempt = 0;; ++attempt) {
        limiter_.acquire();
        HttpResponse r = transport_->send(method, path, headers, body);
        const bool limited = r.status == 429 ||
                             (r.status == 403 && (r.headers.count("retry-after") ||
                                                  header_int(r, "x-ratelimit-remaining") == 0));
        if (!limited) return r;
        Timestamp resume = clock_.now() + 60'000;
        if (auto after = header_int(r, "retry-after")) {
            resume = clock_.now() + *after * 1000;
        } else if (auto reset = header_int(r, "x-ratelimit-reset")) {
            resume = *reset * 1000;
        }
        limiter_.defer_until(resume);
        spdlog::warn("github: rate limited on {} {}, resuming at {}", method, path, format_timestamp(resume));
        if (attempt >= options_.rate_limit_retries)
            throw TransportError(TransportError::Kind::ServerError, method + " " + path + ": rate limit persists");
    }
}

IssueStatus GitHubClient::fetch_issue_status(const IssueKey& key) {
    IssueStatus status;
    status.key = key;
    std::vector<std::pair<std::string, std::string>> extra;
    std::optional<IssueStatus> cached;
    {
        std::lock_guard lock(cache_mu_);
        if (auto it = etag_cache_.find(key); it != etag_cache_.end() && it->second.etag) {
            cached = it->second;
            extra.emplace_back("If-None-Match", *it->second.etag);
        }
    }
    const HttpResponse r = request("GET", repo_path(key.repo) + "/issues/" + std::to_string(key.number), {}, extra);
    if (r.status == 304 && cached) return *cached;
    if (r.status >= 500)
        throw TransportError(TransportError::Kind::ServerError,
                             "fetch " + key.to_string() + ": HTTP " + std::to_string(r.status));
    if (r.status != 200) return status; // Unknown
    const auto j = json::parse(r.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("state") || !j["state"].is_string()) return status;
    const auto state = j["state"].get<std::string>();
    if (state == "closed") {
        status.state = IssueState::Resolved;
        if (j.contains("closed_at") && j["closed_at"].is_string())
            status.resolved_at = parse_iso8601(j["closed_at"].get<std::string>());
        if (j.contains("state_reason") && j["state_reason"].is_string())
            status.close_reason = j["state_reason"].get<std::string>();
    } else if (state == "open") {
        status.state = IssueState::Open;
    } else {
        return status;
    }
    if (j.contains("body") && j["body"].is_string())
        status.bot_report = j["body"].get<std::string>().find(options_.report_marker) != std::string::npos;
    if (auto it = r.headers.find("etag"); it != r.headers.end()) {
        status.etag = it->second;
        std::lock_guard lock(cache_mu_);
        etag_cache_[key] = status;
    }
    return status;
}

PostReceipt GitHubClient::post_comment(const PostTarget& target, std::string_view body) {
    target.validate();
    if (body.empty()) throw std::invalid_argument("comment body must be non-empty");
    auto [fitted, truncated] = fit_body(body);
    std::string path;
    if (target.kind == TargetKind::PullRequest)
        path = repo_path(target.repo) + "/issues/" + std::to_string(target.number) + "/comments";
    else if (target.kind == TargetKind::Commit)
        path = repo_path(target.repo) + "/commits/" + target.sha + "/comments";
    else
        throw std::invalid_argument("post_comment: use create_issue for NewIssue targets");
    const auto r = request("POST", path, json{{"body", fitted}}.dump());
    check_post_status(r, "post comment on " + target.to_string());
    return receipt_from(r, truncated, false);
}

PostReceipt GitHubClient::create_issue(const RepoId& repo, std::string_view title, std::string_view body) {
    if (title.empty()) throw std::invalid_argument("issue title must be non-empty");
    auto [fitted, truncated] = fit_body(body);
    const auto r = request("POST", repo_path(repo) + "/issues",
                           json{{"title", std::string(title)}, {"body", fitted}}.dump());
    check_post_status(r, "create issue in " + repo.full_name());
    return receipt_from(r, truncated, true);
}

std::string GitHubClient::fetch_file(const RepoId& repo, const std::string& path, const std::string& ref) {
    const auto r = request("GET", repo_path(repo) + "/contents/" + url_encode_path(path) + "?ref=" + ref, {},
                           {{"Accept", "application/vnd.github.raw"}});
    if (r.status >= 500)
        throw TransportError(TransportError::Kind::ServerError, "fetch " + path + ": HTTP " + std::to_string(r.status));
    if (r.status != 200) throw ScanError("cannot fetch " + path + " at " + ref + ": HTTP " + std::to_string(r.status));
    return r.body;
}

ChangedFile GitHubClient::lazy_file(const RepoId& repo, std::string path, std::string ref) {
    return ChangedFile{path, [this, repo, path, ref] { return fetch_file(repo, path, ref); }};
}

std::vector<ChangedFile> GitHubClient::list_changed_files(const RepoId& repo, const ChangeRequest& change) {
    std::vector<ChangedFile> files;
    if (const auto* push = std::get_if<PushChange>(&change)) {
        const auto r = request("GET", repo_path(repo) + "/commits/" + push->after_sha);
        if (r.status >= 500)
            throw TransportError(TransportError::Kind::ServerError, "commit lookup: HTTP " + std::to_string(r.status));
        if (r.status != 200) throw ScanError("unknown commit " + push->after_sha + " in " + repo.full_name());
        for (auto& p : push_paths(*push)) files.push_back(lazy_file(repo, p, push->after_sha));
        return files;
    }
    const auto& pr = std::get<PullRequestChange>(change);
    for (int page = 1;; ++page) {
        const auto r = request("GET", repo_path(repo) + "/pulls/" + std::to_string(pr.number) +
                                          "/files?per_page=100&page=" + std::to_string(page));
        if (r.status >= 500)
            throw TransportError(TransportError::Kind::ServerError, "pull files: HTTP " + std::to_string(r.status));
        if (r.status != 200) throw ScanError("cannot list files of pull request #" + std::to_string(pr.number));
        const auto j = json::parse(r.body, nullptr, false);
        if (j.is_discarded() || !j.is_array()) throw ScanError("malformed pull request file listing");
        for (const auto& f : j) {
            if (f.value("status", "") == "removed") continue;
            files.push_back(lazy_file(repo, f.value("filename", ""), pr.head_sha));
        }
        if (j.size() < 100) break;
    }
    return files;
}

std::vector<ChangedFile> GitHubClient::list_tree(const RepoId& repo, std::string_view ref) {
    const std::string ref_str(ref);
    const auto r = request("GET", repo_path(repo) + "/git/trees/" + ref_str + "?recursive=1");
    if (r.status >= 500)
        throw TransportError(TransportError::Kind::ServerError, "tree listing: HTTP " + std::to_string(r.status));
    if (r.status != 200) throw ScanError("unknown ref " + ref_str + " in " + repo.full_name());
    const auto j = json::parse(r.body, nullptr, false);
    if (j.is_discarded() || !j.contains("tree")) throw ScanError("malformed tree listing");
    std::vector<ChangedFile> files;
    for (const auto& e : j["tree"])
        if (e.value("type", "") == "blob") files.push_back(lazy_file(repo, e.value("path", ""), ref_str));
    return files;
}

std::optional<PostReceipt> GitHubClient::find_post(const PostTarget& target, std::string_view marker) {
    std::string base;
    bool issues = false;
    switch (target.kind) {
    case TargetKind::PullRequest:
        base = repo_path(target.repo) + "/issues/" + std::to_string(target.number) + "/comments?per_page=100";
        break;
    case TargetKind::Commit:
        base = repo_path(target.repo) + "/commits/" + target.sha + "/comments?per_page=100";
        break;
    case TargetKind::NewIssue:
        base = repo_path(target.repo) + "/issues?state=all&sort=created&direction=desc&per_page=100";
        issues = true;
        break;
    }
    for (int page = 1; page <= 10; ++page) {
        const auto r = request("GET", base + "&page=" + std::to_string(page));
        if (r.status >= 500)
            throw TransportError(TransportError::Kind::ServerError, "find post: HTTP " + std::to_string(r.status));
        if (r.status != 200) return std::nullopt;
        const auto j = json::parse(r.body, nullptr, false);
        if (j.is_discarded() || !j.is_array()) return std::nullopt;
        for (const auto& item : j) {
            const auto body = item.value("body", std::string{});
            if (body.find(marker) == std::string::npos) continue;
            PostReceipt receipt;
            receipt.id = issues ? std::to_string(item.value("number", std::uint64_t{0}))
                                : std::to_string(item.value("id", std::uint64_t{0}));
            receipt.url = item.value("html_url", "");
            return receipt;
        }
        if (j.size() < 100) break;
    }
    return std::nullopt;
}

} // namespace sentinel
