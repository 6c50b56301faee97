#pragma once

#include "voice/gateway/gateway.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace voice::gateway {

/// Service settings, normally read from VOICE_* environment variables.
struct ServiceConfig {
    std::string listen_addr = "127.0.0.1:8080";
    std::filesystem::path data_dir = "data";
    std::string backend = "scripted";  // scripted | realtime
    std::optional<std::filesystem::path> script_path;
    std::string realtime_endpoint;
    std::string realtime_key;
    std::optional<std::filesystem::path> agent_config;

    using Getenv = std::function<const char*(const char*)>;
    static ServiceConfig from_env(const Getenv& getenv_fn);

    /// Throws agents::ConfigError on an unusable combination.
    void validate() const;
    /// One-line summary with the realtime key redacted.
    std::string describe() const;
};

/// Loads the agent table and script (or realtime settings) named by `config`
/// and returns a ready GatewayConfig.
GatewayConfig make_gateway_config(const ServiceConfig& config, std::shared_ptr<const agents::Clock> clock = nullptr);

}  // namespace voice::gateway
