#include "voice/gateway/config.hpp"

#include "voice/gateway/realtime_backend.hpp"
#include "voice/gateway/server.hpp"
#include "voice/scripted/scripted_backend.hpp"

namespace voice::gateway {

using agents::ConfigError;

ServiceConfig ServiceConfig::from_env(const Getenv& getenv_fn) {
    ServiceConfig c;
    const auto get = [&](const char* name) -> std::optional<std::string> {
        const char* v = getenv_fn(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    if (auto v = get("VOICE_LISTEN_ADDR")) c.listen_addr = *v;
    if (auto v = get("VOICE_DATA_DIR")) c.data_dir = *v;
    if (auto v = get("VOICE_BACKEND")) c.backend = *v;
    if (auto v = get("VOICE_SCRIPT_PATH")) c.script_path = *v;
    if (auto v = get("VOICE_REALTIME_ENDPOINT")) c.realtime_endpoint = *v;
    if (auto v = get("VOICE_REALTIME_KEY")) c.realtime_key = *v;
    if (auto v = get("VOICE_AGENT_CONFIG")) c.agent_config = *v;
    return c;
}

void ServiceConfig::validate() const {
    try {
        parse_listen_address(listen_addr);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (backend == "scripted") {
        if (!script_path) throw ConfigError("VOICE_BACKEND=scripted needs VOICE_SCRIPT_PATH");
    } else if (backend == "realtime") {
        if (realtime_endpoint.empty()) throw ConfigError("VOICE_BACKEND=realtime needs VOICE_REALTIME_ENDPOINT");
        if (realtime_key.empty()) throw ConfigError("VOICE_BACKEND=realtime needs VOICE_REALTIME_KEY");
    } else {
        throw ConfigError("VOICE_BACKEND must be scripted or realtime, got '" + backend + "'");
    }
}

std::string ServiceConfig::describe() const {
    std::string s = "listen=" + listen_addr + " data_dir=" + data_dir.string() + " backend=" + backend;
    if (script_path) s += " script=" + script_path->string();
    if (!realtime_endpoint.empty()) s += " endpoint=" + realtime_endpoint + " key=" + (realtime_key.empty() ? "-" : "***");
    if (agent_config) s += " agents=" + agent_config->string();
    return s;
}

GatewayConfig make_gateway_config(const ServiceConfig& config, std::shared_ptr<const agents::Clock> clock) {
    config.validate();
    auto table = std::make_shared<const agents::AgentTable>(
        config.agent_config ? agents::AgentTable::load(*config.agent_config) : agents::AgentTable::defaults());

    GatewayConfig g;
    g.agents = table;
    g.clock = clock ? std::move(clock) : std::make_shared<agents::SystemClock>();
    g.data_dir = config.data_dir;
    if (config.backend == "scripted") {
        auto script = std::make_shared<const scripted::ConversationScript>(scripted::load_script(*config.script_path, *table));
        g.backend_factory = [script](const std::string&) -> std::unique_ptr<agents::Backend> {
            return std::make_unique<scripted::ScriptedBackend>(*script);
        };
    } else {
        const RealtimeEndpoint endpoint{config.realtime_endpoint, config.realtime_key};
        g.backend_factory = [endpoint](const std::string&) -> std::unique_ptr<agents::Backend> {
            return std::make_unique<RealtimeBackend>(connect_realtime(endpoint));
        };
    }
    return g;
}

}  // namespace voice::gateway
