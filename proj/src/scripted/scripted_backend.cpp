#include "voice/scripted/scripted_backend.hpp"

#include <algorithm>

namespace voice::scripted {

using agents::AssistantText;
using agents::BackendEvents;

namespace {

std::string expand(std::string text, const std::string& narrative) {
    static constexpr std::string_view placeholder = "{summary}";
    for (auto at = text.find(placeholder); at != std::string::npos; at = text.find(placeholder, at + narrative.size())) {
        text.replace(at, placeholder.size(), narrative);
    }
    return text;
}

}  // namespace

ScriptedBackend::ScriptedBackend(ConversationScript script) : script_(std::move(script)) {}

BackendEvents ScriptedBackend::begin(const agents::InstructionBundle& bundle) {
    return enter(bundle.agent);
}

BackendEvents ScriptedBackend::set_instructions(const agents::InstructionBundle& bundle) {
    return enter(bundle.agent);
}

BackendEvents ScriptedBackend::enter(AgentId agent) {
    agent_ = agent;
    BackendEvents out;
    while (cursor_ < script_.steps.size()) {
        const ScriptStep& step = script_.steps[cursor_];
        if (step.trigger != Trigger::enter || step.expected_agent != agent) break;
        ++cursor_;
        emit(step, out);
    }
    return out;
}

void ScriptedBackend::emit(const ScriptStep& step, BackendEvents& out) {
    for (const std::string& line : step.assistant_text) {
        std::string text = expand(line, narrative_);
        if (text.empty()) continue;
        last_prompt_ = text;
        out.emplace_back(AssistantText{std::move(text)});
    }
    for (const ToolCall& call : step.tool_calls) out.emplace_back(call);
}

BackendEvents ScriptedBackend::user_turn(const agents::UserInput& input) {
    const int index = user_turns_++;
    const bool garbled = std::any_of(script_.faults.begin(), script_.faults.end(), [&](const FaultSpec& f) {
        return f.kind == FaultKind::garble_transcript && f.turn_index == index;
    });
    const std::string heard = garbled ? std::string(kUnintelligible) : input.text;

    BackendEvents out;
    out.emplace_back(agents::UserTranscript{heard});
    if (cursor_ >= script_.steps.size()) {
        throw ScriptUnderrun("script '" + script_.script_id + "' has no step left for user turn " +
                             std::to_string(index + 1));
    }
    const ScriptStep& step = script_.steps[cursor_];
    const bool ready = step.trigger == Trigger::user && step.expected_agent == agent_;
    if (ready && (step.on_no_match == OnNoMatch::accept_any || keywords_match(step.keywords, normalize_text(heard)))) {
        ++cursor_;
        emit(step, out);
        return out;
    }
    ++reprompts_;
    out.emplace_back(AssistantText{std::string(kRepromptPrefix) + last_prompt_});
    return out;
}

BackendEvents ScriptedBackend::tool_result(const ToolCall& call, const agents::ToolResult& result) {
    if (call.kind == agents::ToolKind::run_final_analysis && result.ok && result.payload.contains("narrative")) {
        narrative_ = result.payload["narrative"].get<std::string>();
    }
    return {};
}

}  // namespace voice::scripted
