#pragma once

#include "voice/gateway/gateway.hpp"

#include <memory>
#include <string>
#include <thread>

namespace voice::gateway {

/// HTTP + WebSocket front end for a Gateway:
///   GET  /healthz
///   WS   /session
///   PUT  /sessions/{id}/videos/{component}   (Content-Type video/webm|video/mp4,
///                                             optional X-Video-Duration seconds)
///   GET  /sessions/{id}/videos/{component}
///   GET  /sessions/{id}/report
class Server {
public:
    /// Binds immediately; throws std::runtime_error when the address cannot
    /// be bound. Port 0 picks a free port.
    Server(Gateway& gateway, const std::string& address, unsigned short port);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    unsigned short port() const;

    /// Serves on a background thread.
    void start();
    /// Blocks until stop() is called from another thread or a signal handler.
    void run();
    /// Aborts live sessions with reports, then stops accepting and joins.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Parses "host:port"; a bare port binds 0.0.0.0.
std::pair<std::string, unsigned short> parse_listen_address(const std::string& text);

}  // namespace voice::gateway
