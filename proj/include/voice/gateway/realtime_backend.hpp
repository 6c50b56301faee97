#pragma once

#include "voice/agents/backend.hpp"

#include <nlohmann/json.hpp>

#include <deque>
#include <memory>
#include <string>

namespace voice::gateway {

/// A JSON event channel to a realtime speech model.
class RealtimeTransport {
public:
    virtual ~RealtimeTransport() = default;
    virtual void send(const nlohmann::ordered_json& event) = 0;
    /// Blocks for the next server event.
    virtual nlohmann::ordered_json receive() = 0;
    virtual void close() {}
};

struct RealtimeEndpoint {
    std::string url;  // wss://host[:port]/path?query
    std::string api_key;
};

/// TLS WebSocket transport (Boost.Beast + OpenSSL). Connects on construction.
std::unique_ptr<RealtimeTransport> connect_realtime(const RealtimeEndpoint& endpoint);

// Pure mappings between engine types and realtime events.
nlohmann::ordered_json tool_schema(agents::ToolKind kind);
nlohmann::ordered_json session_update_event(const agents::InstructionBundle& bundle);
std::vector<nlohmann::ordered_json> user_input_events(const agents::UserInput& input);
nlohmann::ordered_json function_output_event(const std::string& call_id, const agents::ToolResult& result);

/// Result of mapping one server event.
struct MappedEvent {
    std::optional<agents::BackendEvent> event;
    std::string call_id;        // set for tool calls
    bool response_done = false;
};
/// Throws std::runtime_error for server `error` events and malformed tool calls.
MappedEvent map_server_event(const nlohmann::ordered_json& event);

/// Backend adapter for a live realtime model. Each call drives the model
/// until its response completes.
class RealtimeBackend final : public agents::Backend {
public:
    explicit RealtimeBackend(std::unique_ptr<RealtimeTransport> transport);

    agents::BackendEvents begin(const agents::InstructionBundle& bundle) override;
    agents::BackendEvents user_turn(const agents::UserInput& input) override;
    agents::BackendEvents tool_result(const agents::ToolCall& call, const agents::ToolResult& result) override;
    agents::BackendEvents set_instructions(const agents::InstructionBundle& bundle) override;
    void close() override;

private:
    agents::BackendEvents collect_response();

    std::unique_ptr<RealtimeTransport> transport_;
    std::deque<std::pair<agents::ToolCall, std::string>> outstanding_;
};

}  // namespace voice::gateway
