#pragma once

#include "sentinel/clock.hpp"
#include "sentinel/forge.hpp"
#include "sentinel/rate_limiter.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace sentinel {

struct HttpResponse {
    int status = 0;
    std::map<std::string, std::string> headers; // lowercase names
    std::string body;
};

/// Minimal blocking HTTP transport. Throws TransportError on timeouts and
/// connection failures.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse send(const std::string& method, const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              const std::string& body) = 0;
};

/// cpp-httplib transport against a base URL such as https://api.github.com.
std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url, Millis timeout);

struct GitHubOptions {
    std::string api_base = "https://api.github.com";
    std::string token; // sent as "Authorization: Bearer <token>"
    Millis min_interval{250};
    Millis timeout{10000};
    int rate_limit_retries = 3;
    std::string user_agent = "satd-sentinel";
    std::string report_marker{kReportMarker};
};

/// Forge implementation over the GitHub REST v3 API.
class GitHubClient final : public Forge {
public:
    GitHubClient(GitHubOptions options, Clock& clock);
    GitHubClient(GitHubOptions options, Clock& clock, std::unique_ptr<HttpTransport> transport);

    IssueStatus fetch_issue_status(const IssueKey& key) override;
    PostReceipt post_comment(const PostTarget& target, std::string_view body) override;
    PostReceipt create_issue(const RepoId& repo, std::string_view title, std::string_view body) override;
    std::vector<ChangedFile> list_changed_files(const RepoId& repo, const ChangeRequest& change) override;
    std::vector<ChangedFile> list_tree(const RepoId& repo, std::string_view ref) override;
    std::optional<PostReceipt> find_post(const PostTarget& target, std::string_view marker) override;

private:
    HttpResponse request(const std::string& method, const std::string& path, const std::string& body = {},
                         const std::vector<std::pair<std::string, std::string>>& extra = {});
    std::string fetch_file(const RepoId& repo, const std::string& path, const std::string& ref);
    ChangedFile lazy_file(const RepoId& repo, std::string path, std::string ref);

    GitHubOptions options_;
    Clock& clock_;
    std::unique_ptr<HttpTransport> transport_;
    RateLimiter limiter_;
    std::mutex cache_mu_;
    std::map<IssueKey, IssueStatus> etag_cache_;
};

} // namespace sentinel
