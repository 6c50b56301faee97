#pragma once

#include "voice/agents/engine.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace voice::agents {

struct AssistantAudio {
    std::vector<std::int16_t> pcm;  // 24 kHz mono
};

/// What the backend heard the user say.
struct UserTranscript {
    std::string text;
};

using BackendEvent = std::variant<AssistantText, AssistantAudio, ToolCall, UserTranscript>;
using BackendEvents = std::vector<BackendEvent>;

/// One committed push-to-talk turn, or a typed turn in text mode. `text` is
/// the locally available transcription, which may be empty in voice mode.
struct UserInput {
    std::string text;
    std::vector<std::int16_t> audio;
};

/// A conversation backend produces assistant output and tool calls. It never
/// touches assessment state; every change goes through emitted ToolCalls.
class Backend {
public:
    virtual ~Backend() = default;

    virtual BackendEvents begin(const InstructionBundle& bundle) = 0;
    virtual BackendEvents user_turn(const UserInput& input) = 0;
    virtual BackendEvents tool_result(const ToolCall& call, const ToolResult& result) = 0;
    virtual BackendEvents set_instructions(const InstructionBundle& bundle) = 0;
    virtual void close() {}
};

}  // namespace voice::agents
