#include "fake_github.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/hashing.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <ctime>
#include <regex>

namespace sentinel::testing {

namespace {

using json = nlohmann::json;

HttpResponse respond(int status, std::string body = {}) {
    HttpResponse r;
    r.status = status;
    r.body = std::move(body);
    return r;
}

HttpResponse respond_json(int status, const json& j) { return respond(status, j.dump()); }

std::string iso8601(Timestamp t) {
    const std::time_t secs = t / 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::map<std::string, std::string> parse_query(const std::string& query) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < query.size()) {
        auto amp = query.find('&', pos);
        if (amp == std::string::npos) amp = query.size();
        const auto item = query.substr(pos, amp - pos);
        const auto eq = item.find('=');
        if (eq == std::string::npos) out[item] = "";
        else out[item.substr(0, eq)] = item.substr(eq + 1);
        pos = amp + 1;
    }
    return out;
}

std::string url_decode(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::size_t page_of(const std::map<std::string, std::string>& q, const char* name, std::size_t fallback) {
    auto it = q.find(name);
    return it == q.end() || it->second.empty() ? fallback : std::stoul(it->second);
}

json paginate(const json& all, const std::map<std::string, std::string>& q) {
    const auto per_page = page_of(q, "per_page", 30);
    const auto page = page_of(q, "page", 1);
    json out = json::array();
    for (std::size_t i = (page - 1) * per_page; i < all.size() && i < page * per_page; ++i) out.push_back(all[i]);
    return out;
}

} // namespace

void FakeGitHub::script(HttpResponse response) {
    std::lock_guard lock(mu_);
    scripted_.push_back(std::move(response));
}

std::vector<FakeGitHub::Request> FakeGitHub::requests() const {
    std::lock_guard lock(mu_);
    return log_;
}

HttpResponse FakeGitHub::handle(const Request& request) {
    {
        std::lock_guard lock(mu_);
        log_.push_back(request);
        if (!scripted_.empty()) {
            auto r = scripted_.front();
            scripted_.pop_front();
            return r;
        }
    }
    try {
        return route(request);
    } catch (const TransportError& e) {
        if (e.kind() == TransportError::Kind::Timeout) throw;
        return respond(500, e.what());
    } catch (const ForgeError& e) {
        return respond(e.status(), e.what());
    } catch (const ScanError& e) {
        return respond(404, e.what());
    }
}

HttpResponse FakeGitHub::route(const Request& request) {
    static const std::regex issue_re(R"(^/repos/([^/]+)/([^/]+)/issues/(\d+)$)");
    static const std::regex issue_comments_re(R"(^/repos/([^/]+)/([^/]+)/issues/(\d+)/comments$)");
    static const std::regex issues_re(R"(^/repos/([^/]+)/([^/]+)/issues$)");
    static const std::regex commit_re(R"(^/repos/([^/]+)/([^/]+)/commits/([0-9a-f]+)$)");
    static const std::regex commit_comments_re(R"(^/repos/([^/]+)/([^/]+)/commits/([0-9a-f]+)/comments$)");
    static const std::regex pull_files_re(R"(^/repos/([^/]+)/([^/]+)/pulls/(\d+)/files$)");
    static const std::regex contents_re(R"(^/repos/([^/]+)/([^/]+)/contents/(.+)$)");
    static const std::regex tree_re(R"(^/repos/([^/]+)/([^/]+)/git/trees/(.+)$)");

    const auto qpos = request.target.find('?');
    const std::string path = request.target.substr(0, qpos);
    const auto query = parse_query(qpos == std::string::npos ? "" : request.target.substr(qpos + 1));
    std::smatch m;
    auto repo_of = [&] { return RepoId{"github.com", m[1].str(), m[2].str()}; };
    const bool get = request.method == "GET";
    const bool post = request.method == "POST";

    if (get && std::regex_match(path, m, issue_re)) {
        const IssueKey key{repo_of(), std::stoull(m[3].str())};
        const auto status = forge_.fetch_issue_status(key);
        if (status.state == IssueState::Unknown) return respond(404, R"({"message":"Not Found"})");
        json j{{"number", key.number},
               {"state", status.state == IssueState::Resolved ? "closed" : "open"},
               {"body", status.bot_report ? std::string(kReportMarker) + " -->" : std::string()},
               {"html_url", key.url()}};
        if (status.resolved_at) j["closed_at"] = iso8601(*status.resolved_at);
        if (status.close_reason) j["state_reason"] = *status.close_reason;
        auto r = respond_json(200, j);
        const auto etag = "\"" + sha256_hex(r.body).substr(0, 16) + "\"";
        if (auto it = request.headers.find("if-none-match"); it != request.headers.end() && it->second == etag)
            return respond(304);
        r.headers["etag"] = etag;
        return r;
    }
    if (post && std::regex_match(path, m, issue_comments_re)) {
        const auto body = json::parse(request.body).at("body").get<std::string>();
        const auto receipt = forge_.post_comment(PostTarget::pull_request(repo_of(), std::stoull(m[3].str())), body);
        return respond_json(201, {{"id", std::stoull(receipt.id)}, {"html_url", receipt.url}});
    }
    if (post && std::regex_match(path, m, commit_comments_re)) {
        const auto body = json::parse(request.body).at("body").get<std::string>();
        const auto receipt = forge_.post_comment(PostTarget::commit(repo_of(), m[3].str()), body);
        return respond_json(201, {{"id", std::stoull(receipt.id)}, {"html_url", receipt.url}});
    }
    if (post && std::regex_match(path, m, issues_re)) {
        const auto j = json::parse(request.body);
        const auto receipt = forge_.create_issue(repo_of(), j.at("title").get<std::string>(),
                                                 j.at("body").get<std::string>());
        return respond_json(201, {{"number", std::stoull(receipt.id)}, {"html_url", receipt.url}});
    }
    if (get && std::regex_match(path, m, issue_comments_re)) {
        const auto target = PostTarget::pull_request(repo_of(), std::stoull(m[3].str()));
        json all = json::array();
        for (const auto& e : forge_.outbox())
            if (e.target == target) all.push_back({{"id", std::stoull(e.id)}, {"body", e.body}});
        return respond_json(200, paginate(all, query));
    }
    if (get && std::regex_match(path, m, commit_comments_re)) {
        const auto target = PostTarget::commit(repo_of(), m[3].str());
        json all = json::array();
        for (const auto& e : forge_.outbox())
            if (e.target == target) all.push_back({{"id", std::stoull(e.id)}, {"body", e.body}});
        return respond_json(200, paginate(all, query));
    }
    if (get && std::regex_match(path, m, issues_re)) {
        const auto repo = repo_of();
        json all = json::array();
        const auto outbox = forge_.outbox();
        for (auto it = outbox.rbegin(); it != outbox.rend(); ++it) {
            if (it->target.kind == TargetKind::NewIssue && it->target.repo == repo)
                all.push_back({{"number", it->target.number}, {"body", it->body}});
        }
        return respond_json(200, paginate(all, query));
    }
    if (get && std::regex_match(path, m, commit_re)) {
        forge_.list_tree(repo_of(), m[3].str()); // throws ScanError for an unknown sha
        return respond_json(200, {{"sha", m[3].str()}});
    }
    if (get && std::regex_match(path, m, pull_files_re)) {
        const auto repo = repo_of();
        const auto number = std::stoull(m[3].str());
        const auto head = forge_.pull_request_head(repo, number);
        if (!head) return respond(404);
        json all = json::array();
        for (const auto& f : forge_.list_changed_files(repo, PullRequestChange{number, *head}))
            all.push_back({{"filename", f.path}, {"status", "modified"}});
        return respond_json(200, paginate(all, query));
    }
    if (get && std::regex_match(path, m, contents_re)) {
        auto content = forge_.file_at(repo_of(), query.count("ref") ? query.at("ref") : "", url_decode(m[3].str()));
        if (!content) return respond(404);
        return respond(200, *content);
    }
    if (get && std::regex_match(path, m, tree_re)) {
        json tree = json::array();
        for (const auto& f : forge_.list_tree(repo_of(), m[3].str()))
            tree.push_back({{"path", f.path}, {"type", "blob"}});
        return respond_json(200, {{"tree", tree}, {"truncated", false}});
    }
    return respond(404, R"({"message":"Not Found"})");
}

HttpResponse FakeTransport::send(const std::string& method, const std::string& path,
                                 const std::vector<std::pair<std::string, std::string>>& headers,
                                 const std::string& body) {
    FakeGitHub::Request request{method, path, {}, body};
    for (const auto& [k, v] : headers) {
        std::string lower = k;
        for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        request.headers[lower] = v;
    }
    return github_.handle(request);
}

LoopbackGitHub::LoopbackGitHub(FakeGitHub& github, Millis stall)
    : github_(github), server_(std::make_unique<httplib::Server>()) {
    auto handler = [this, stall](const httplib::Request& req, httplib::Response& res) {
        FakeGitHub::Request request{req.method, req.target, {}, req.body};
        for (const auto& [k, v] : req.headers) {
            std::string lower = k;
            for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            request.headers[lower] = v;
        }
        HttpResponse r;
        try {
            r = github_.handle(request);
        } catch (const TransportError&) {
            // Hold the connection open so the client's read timeout fires.
            std::this_thread::sleep_for(stall);
            r = respond(504, "timeout");
        }
        res.status = r.status;
        for (const auto& [k, v] : r.headers) res.set_header(k, v);
        res.body = r.body;
    };
    server_->Get(".*", handler);
    server_->Post(".*", handler);
    server_->Patch(".*", handler);
    port_ = server_->bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("cannot bind loopback server");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

LoopbackGitHub::~LoopbackGitHub() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace sentinel::testing
