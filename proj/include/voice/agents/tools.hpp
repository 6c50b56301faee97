#pragma once

#include "voice/agents/agent_table.hpp"
#include "voice/assessment/types.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace voice::agents {

using ordered_json = nlohmann::ordered_json;

// Arguments by kind:
//   update_assessment_state  {"field": "<path>", "value": <json>}
//   start_video_recording    {"component": "facial" | "arm"}
//   transfer_agent           {"target": "<agent id>"}
//   run_final_analysis, disconnect  {}
struct ToolCall {
    ToolKind kind = ToolKind::update_assessment_state;
    ordered_json arguments = ordered_json::object();

    static ToolCall update(std::string field, ordered_json value);
    static ToolCall start_video(assessment::VideoComponent component);
    static ToolCall transfer(AgentId target);
    static ToolCall final_analysis();
    static ToolCall disconnect();

    ordered_json to_json() const;
    static ToolCall from_json(const ordered_json& j);

    friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

namespace tool_error {
inline constexpr std::string_view permission_denied = "permission_denied";
inline constexpr std::string_view invalid_arguments = "invalid_arguments";
inline constexpr std::string_view invalid_transfer = "invalid_transfer";
inline constexpr std::string_view video_gate = "video_gate";
inline constexpr std::string_view video_required = "video_required";
inline constexpr std::string_view state_violation = "state_violation";
}  // namespace tool_error

struct ToolResult {
    bool ok = true;
    std::string error_code;
    std::string message;
    ordered_json payload = ordered_json::object();

    static ToolResult success(ordered_json payload = ordered_json::object());
    static ToolResult failure(std::string_view code, std::string message);

    ordered_json to_json() const;
};

/// Checks arguments against the kind's schema. Returns an empty string when
/// valid, otherwise a description of the problem.
std::string validate_arguments(const ToolCall& call);

/// Every field path accepted by update_assessment_state.
const std::vector<std::string>& updatable_fields();

/// Writes one field into `state`. Relative times resolve against
/// `session_start`. Throws assessment::SchemaError on a bad path or value;
/// `state` is untouched on failure.
void apply_update(assessment::AssessmentState& state, std::string_view field, const ordered_json& value,
                  assessment::UtcMinute session_start);

}  // namespace voice::agents
