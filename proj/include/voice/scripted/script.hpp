#pragma once

#include "voice/agents/agent_table.hpp"
#include "voice/agents/tools.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace voice::scripted {

using agents::AgentId;
using agents::ToolCall;
using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kScriptSchema = "voice-script/1";

class ScriptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Trigger { enter, user };
enum class OnNoMatch { reprompt, accept_any };

struct ScriptStep {
    AgentId expected_agent = AgentId::main;
    Trigger trigger = Trigger::user;
    std::vector<std::string> keywords;        // normalized at load
    std::vector<std::string> assistant_text;  // "{summary}" expands to the latest analysis narrative
    std::vector<ToolCall> tool_calls;
    OnNoMatch on_no_match = OnNoMatch::reprompt;

    friend bool operator==(const ScriptStep&, const ScriptStep&) = default;
};

enum class FaultKind { skip_component, misscore, hallucinate_field, garble_transcript };

struct FaultSpec {
    FaultKind kind = FaultKind::skip_component;
    std::optional<assessment::Component> component;  // skip_component, misscore
    int wrong_value = 0;                             // misscore
    std::string field;                               // hallucinate_field
    ordered_json value;                              // hallucinate_field; null erases the write
    int turn_index = 0;                              // garble_transcript: zero-based user turn

    static FaultSpec skip(assessment::Component c);
    static FaultSpec misscore(assessment::Component c, int wrong_value);
    static FaultSpec hallucinate(std::string field, ordered_json value);
    static FaultSpec garble(int turn_index);

    ordered_json to_json() const;
    static FaultSpec from_json(const ordered_json& j);
    std::string describe() const;

    friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

struct ConversationScript {
    std::string script_id;
    std::string description;
    std::vector<ScriptStep> steps;
    std::vector<FaultSpec> faults;  // applied faults, in injection order

    friend bool operator==(const ConversationScript&, const ConversationScript&) = default;
};

/// Lowercases and collapses whitespace runs to single spaces.
std::string normalize_text(std::string_view text);

/// True when every keyword occurs in the normalized text.
bool keywords_match(const std::vector<std::string>& keywords, std::string_view normalized_text);

/// Checks phase order, tool permissions and keyword sets against the agent
/// table. Throws ScriptError naming the offending step.
void validate_script(const ConversationScript& script, const agents::AgentTable& table);

/// Parses a voice-script/1 document. Faults listed in the document are
/// injected after the steps validate.
ConversationScript parse_script(const ordered_json& j, const agents::AgentTable& table);
ConversationScript load_script(const std::filesystem::path& path, const agents::AgentTable& table);
ordered_json script_to_json(const ConversationScript& script);

/// Returns a copy of `script` with `fault` applied; `script` is unchanged.
/// Throws ScriptError when the fault does not apply (absent component or
/// field, turn index past the script's user steps).
ConversationScript inject_fault(const ConversationScript& script, const FaultSpec& fault,
                                const agents::AgentTable& table);

/// Update-call field paths that belong to a scored component.
bool field_belongs_to(std::string_view field, assessment::Component component);

}  // namespace voice::scripted

namespace voice {
VOICE_ENUM_NAMES(scripted::Trigger, {scripted::Trigger::enter, "enter"}, {scripted::Trigger::user, "user"});
VOICE_ENUM_NAMES(scripted::OnNoMatch, {scripted::OnNoMatch::reprompt, "reprompt"},
                 {scripted::OnNoMatch::accept_any, "accept_any"});
VOICE_ENUM_NAMES(scripted::FaultKind, {scripted::FaultKind::skip_component, "skip_component"},
                 {scripted::FaultKind::misscore, "misscore"},
                 {scripted::FaultKind::hallucinate_field, "hallucinate_field"},
                 {scripted::FaultKind::garble_transcript, "garble_transcript"});
}  // namespace voice
