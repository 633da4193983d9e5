#include "sentinel/http_server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace sentinel {

struct HttpServer::Impl {
    BotService& service;
    std::string bind_address;
    int port;
    httplib::Server server;
};

HttpServer::HttpServer(BotService& service, std::string bind_address, int port)
    : impl_(new Impl{service, std::move(bind_address), port, {}}) {
    auto& svc = impl_->service;
    impl_->server.Post("/webhook", [&svc](const httplib::Request& req, httplib::Response& res) {
        Headers headers;
        for (const auto& [name, value] : req.headers) headers.set(name, value);
        const auto result = svc.handle_webhook(req.body, headers);
        res.status = result.status;
        res.set_content(result.reason + "\n", "text/plain");
    });
    impl_->server.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) {
        res.set_content(svc.health_json(), "application/json");
    });
    // Webhook payloads are small; anything larger is not from the forge.
    impl_->server.set_payload_max_length(25 * 1024 * 1024);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    auto& s = impl_->server;
    int bound = 0;
    if (impl_->port == 0) {
        bound = s.bind_to_any_port(impl_->bind_address);
    } else {
        bound = s.bind_to_port(impl_->bind_address, impl_->port) ? impl_->port : -1;
    }
    if (bound < 0) {
        throw std::runtime_error("cannot bind " + impl_->bind_address + ":" + std::to_string(impl_->port));
    }
    impl_->port = bound;
    spdlog::info("listening on {}:{}", impl_->bind_address, bound);
    return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

} // namespace sentinel
