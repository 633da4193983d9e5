#pragma once

#include "sentinel/bot_service.hpp"

#include <memory>
#include <string>

namespace sentinel {

/// `POST /webhook` and `GET /healthz` in front of a BotService.
class HttpServer {
public:
    HttpServer(BotService& service, std::string bind_address, int port);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket and returns the bound port (port 0 picks one).
    /// Throws std::runtime_error when the address is unavailable.
    int bind();
    /// Serves until stop(). Call bind() first.
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace sentinel
