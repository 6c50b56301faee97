#pragma once

#include "voice/assessment/enums.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace voice::agents {

enum class AgentId { main, onset_lkw, facial, arm, speech, eye_deviation, neglect, anticoagulant, final_summary };

inline constexpr std::array<AgentId, 9> kAgentIds{AgentId::main,          AgentId::onset_lkw, AgentId::facial,
                                                  AgentId::arm,           AgentId::speech,    AgentId::eye_deviation,
                                                  AgentId::neglect,       AgentId::anticoagulant,
                                                  AgentId::final_summary};

enum class ToolKind { update_assessment_state, start_video_recording, transfer_agent, run_final_analysis, disconnect };

inline constexpr std::string_view kAgentsSchema = "voice-agents/1";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AgentDescriptor {
    AgentId id = AgentId::main;
    std::string instructions;
    std::set<ToolKind> allowed_tools;
};

/// The agent graph: one descriptor per agent plus the predefined flow. The
/// main agent appears several times in the flow (opening, closing questions,
/// summary); every other agent appears exactly once.
class AgentTable {
public:
    AgentTable(std::vector<AgentDescriptor> descriptors, std::vector<AgentId> flow);

    static AgentTable defaults();
    static AgentTable from_json(const nlohmann::ordered_json& j);
    static AgentTable load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;

    /// Throws ConfigError describing the first problem found.
    void validate() const;

    const AgentDescriptor& descriptor(AgentId id) const;
    bool allows(AgentId id, ToolKind tool) const;
    const std::vector<AgentId>& flow() const { return flow_; }

    /// Successor of the first flow position held by `id`.
    std::optional<AgentId> successor(AgentId id) const;
    /// First position after `from` held by `target`.
    std::optional<std::size_t> next_position(std::size_t from, AgentId target) const;
    std::optional<std::size_t> first_position(AgentId id) const;

private:
    std::vector<AgentDescriptor> descriptors_;
    std::vector<AgentId> flow_;
};

/// The default predefined order of agents.
std::vector<AgentId> agent_order();

AgentId agent_for(assessment::Component component);
std::optional<assessment::Component> component_for(AgentId agent);

}  // namespace voice::agents

namespace voice {
VOICE_ENUM_NAMES(agents::AgentId, {agents::AgentId::main, "main"}, {agents::AgentId::onset_lkw, "onset_lkw"},
                 {agents::AgentId::facial, "facial"}, {agents::AgentId::arm, "arm"},
                 {agents::AgentId::speech, "speech"}, {agents::AgentId::eye_deviation, "eye_deviation"},
                 {agents::AgentId::neglect, "neglect"}, {agents::AgentId::anticoagulant, "anticoagulant"},
                 {agents::AgentId::final_summary, "final_summary"});
VOICE_ENUM_NAMES(agents::ToolKind, {agents::ToolKind::update_assessment_state, "update_assessment_state"},
                 {agents::ToolKind::start_video_recording, "start_video_recording"},
                 {agents::ToolKind::transfer_agent, "transfer_agent"},
                 {agents::ToolKind::run_final_analysis, "run_final_analysis"},
                 {agents::ToolKind::disconnect, "disconnect"});
}  // namespace voice
