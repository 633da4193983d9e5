#pragma once

#include "sentinel/github_client.hpp"
#include "sentinel/mock_forge.hpp"

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace sentinel::testing {

/// The slice of the GitHub REST API that GitHubClient uses, answered from a
/// MockForge. Injected MockForge failures surface as the HTTP errors a real
/// server would return.
class FakeGitHub {
public:
    explicit FakeGitHub(MockForge& forge) : forge_(forge) {}

    struct Request {
        std::string method;
        std::string target; // path plus query
        std::map<std::string, std::string> headers; // lowercase names
        std::string body;
    };

    HttpResponse handle(const Request& request);

    /// Answers the next request with `response` instead of routing it.
    void script(HttpResponse response);

    [[nodiscard]] std::vector<Request> requests() const;

private:
    HttpResponse route(const Request& request);

    MockForge& forge_;
    mutable std::mutex mu_;
    std::deque<HttpResponse> scripted_;
    std::vector<Request> log_;
};

/// In-process transport: no sockets involved.
class FakeTransport final : public HttpTransport {
public:
    explicit FakeTransport(FakeGitHub& github) : github_(github) {}

    HttpResponse send(const std::string& method, const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      const std::string& body) override;

private:
    FakeGitHub& github_;
};

/// The same fake behind a real HTTP server on 127.0.0.1 and an ephemeral port.
/// An injected timeout stalls the response for `stall` before answering 504.
class LoopbackGitHub {
public:
    explicit LoopbackGitHub(FakeGitHub& github, Millis stall = Millis{1500});
    ~LoopbackGitHub();
    LoopbackGitHub(const LoopbackGitHub&) = delete;
    LoopbackGitHub& operator=(const LoopbackGitHub&) = delete;

    [[nodiscard]] std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    FakeGitHub& github_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

} // namespace sentinel::testing
