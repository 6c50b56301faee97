#pragma once

#include "voice/agents/backend.hpp"
#include "voice/agents/engine.hpp"
#include "voice/gateway/protocol.hpp"

#include <memory>
#include <string>
#include <vector>

namespace voice::gateway {

/// A server message before it gets an envelope (session id and seq).
struct ServerMessage {
    std::string type;
    ordered_json payload = ordered_json::object();
};
using Outbox = std::vector<ServerMessage>;

ServerMessage error_message(std::string_view code, std::string detail);

/// Binds one engine to one backend. Backend output is fed through the engine
/// in order; engine effects become server messages or go back to the
/// backend (tool results, instruction changes). Not thread-safe.
class Conversation {
public:
    Conversation(std::unique_ptr<agents::Engine> engine, std::unique_ptr<agents::Backend> backend,
                 bool voice_mode = false);

    void start(Outbox& out);

    /// Throws agents::StateViolation when the engine cannot take a user turn.
    /// Backend failures are reported as BACKEND_ERROR messages.
    void user_turn(const agents::UserInput& input, Outbox& out);

    void video_registered(const assessment::VideoRef& video, Outbox& out);
    void video_skipped(assessment::VideoComponent component, Outbox& out);
    void abort(std::string_view reason, Outbox& out);

    agents::Engine& engine() { return *engine_; }
    const agents::Engine& engine() const { return *engine_; }
    agents::Backend& backend() { return *backend_; }
    bool ended() const { return engine_->status() == agents::SessionStatus::ended; }

private:
    void drain(agents::BackendEvents events, Outbox& out);
    agents::BackendEvents apply(const std::vector<agents::Effect>& effects, Outbox& out);

    std::unique_ptr<agents::Engine> engine_;
    std::unique_ptr<agents::Backend> backend_;
    bool voice_mode_;
    bool user_committed_ = true;
    std::string pending_user_text_;
};

}  // namespace voice::gateway
