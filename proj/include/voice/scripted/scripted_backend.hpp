#pragma once

#include "voice/agents/backend.hpp"
#include "voice/scripted/script.hpp"

#include <stdexcept>

namespace voice::scripted {

/// The script ran out of steps while the conversation was still going.
class ScriptUnderrun : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kUnintelligible = "[unintelligible]";
inline constexpr std::string_view kRepromptPrefix = "Sorry, I didn't catch that. ";

/// Replays a ConversationScript as a conversation backend. Output depends
/// only on the script, the cursor, the active agent and the normalized user
/// text.
class ScriptedBackend final : public agents::Backend {
public:
    explicit ScriptedBackend(ConversationScript script);

    agents::BackendEvents begin(const agents::InstructionBundle& bundle) override;
    agents::BackendEvents user_turn(const agents::UserInput& input) override;
    agents::BackendEvents tool_result(const agents::ToolCall& call, const agents::ToolResult& result) override;
    agents::BackendEvents set_instructions(const agents::InstructionBundle& bundle) override;

    std::size_t cursor() const { return cursor_; }
    bool exhausted() const { return cursor_ >= script_.steps.size(); }
    int reprompts() const { return reprompts_; }
    const ConversationScript& script() const { return script_; }

private:
    agents::BackendEvents enter(AgentId agent);
    void emit(const ScriptStep& step, agents::BackendEvents& out);

    ConversationScript script_;
    std::size_t cursor_ = 0;
    AgentId agent_ = AgentId::main;
    int user_turns_ = 0;
    int reprompts_ = 0;
    std::string last_prompt_;
    std::string narrative_;
};

}  // namespace voice::scripted
