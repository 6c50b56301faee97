#pragma once

#include "voice/agents/agent_table.hpp"
#include "voice/agents/analyzer.hpp"
#include "voice/agents/clock.hpp"
#include "voice/agents/tools.hpp"
#include "voice/assessment/consistency.hpp"
#include "voice/assessment/report.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace voice::agents {

enum class SessionStatus { running, awaiting_video, awaiting_clarification, finalizing, ended };

/// An event arrived that the session cannot accept in its current status.
class StateViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMaxClarificationRounds = 3;

struct EngineConfig {
    std::shared_ptr<const AgentTable> agents;
    std::shared_ptr<const Clock> clock;
    std::shared_ptr<const Analyzer> analyzer;  // DeterministicAnalyzer when null
    std::string session_id;                    // generated when empty
    int max_clarification_rounds = kMaxClarificationRounds;
};

struct PhaseEntry {
    AgentId agent = AgentId::main;
    std::size_t position = 0;
    std::int64_t entered_s = 0;
    std::optional<std::int64_t> exited_s;
};

/// What a backend needs when control moves to an agent.
struct InstructionBundle {
    AgentId agent = AgentId::main;
    std::string instructions;
    std::vector<ToolKind> tools;
    std::vector<std::string> clarifications;  // fields to re-ask, set during a clarification round

    ordered_json to_json() const;
};

// Events.
struct UserTurnCommitted {
    std::string text;
};
struct AssistantText {
    std::string text;
};
using BackendItem = std::variant<AssistantText, ToolCall>;
struct BackendTurn {
    std::vector<BackendItem> items;
};
struct VideoRegistered {
    assessment::VideoRef video;
};
struct VideoSkipped {
    assessment::VideoComponent component = assessment::VideoComponent::facial;
};
using Event = std::variant<UserTurnCommitted, BackendTurn, VideoRegistered, VideoSkipped>;

// Effects, in the order they happened.
struct SayEffect {
    std::string text;
};
struct VideoRequestEffect {
    assessment::VideoComponent component = assessment::VideoComponent::facial;
};
struct PhaseEffect {
    AgentId agent = AgentId::main;
    SessionStatus status = SessionStatus::running;
};
struct InstructionsEffect {
    InstructionBundle bundle;
};
struct ToolResultEffect {
    ToolCall call;
    ToolResult result;
};
struct ReportEffect {
    assessment::Report report;
    std::string json;
};
struct ErrorEffect {
    std::string code;
    std::string message;
};
using Effect = std::variant<SayEffect, VideoRequestEffect, PhaseEffect, InstructionsEffect, ToolResultEffect,
                            ReportEffect, ErrorEffect>;

/// One assessment session: the agent state machine plus the shared
/// assessment state. Not thread-safe; callers serialize access per session.
class Engine {
public:
    /// Validates the agent table (throws ConfigError) and starts at the
    /// main agent.
    explicit Engine(EngineConfig config);

    /// Effects for entering the first agent (phase and instructions).
    std::vector<Effect> start();

    /// Throws StateViolation when the event does not fit the current status.
    std::vector<Effect> advance(const Event& event);

    /// Runs one tool call on behalf of the active agent.
    ToolResult dispatch_tool(const ToolCall& call, std::vector<Effect>& effects);

    /// Ends the session without a normal disconnect and emits an aborted
    /// report. No-op returning nothing once ended.
    std::vector<Effect> abort(std::string_view reason);

    const std::string& session_id() const { return session_id_; }
    AgentId active_agent() const { return agents_->flow()[position_]; }
    std::size_t position() const { return position_; }
    SessionStatus status() const { return status_; }
    const assessment::AssessmentState& state() const { return state_; }
    const assessment::Transcript& transcript() const { return transcript_; }
    const std::vector<PhaseEntry>& phase_history() const { return phases_; }
    int clarification_rounds() const { return clarification_rounds_; }
    const std::vector<assessment::VideoRef>& registered_videos() const { return videos_; }
    std::optional<assessment::VideoComponent> pending_video() const { return pending_video_; }
    const std::optional<std::string>& report_json() const { return report_json_; }
    const assessment::TranscriptDigest& digest() const { return digest_; }
    std::int64_t started_s() const { return started_s_; }
    assessment::UtcMinute session_start() const { return assessment::UtcMinute::from_seconds(started_s_); }

    /// Persistable snapshot of everything except the transcript.
    ordered_json snapshot() const;

private:
    std::int64_t now() const { return clock_->now_s(); }
    void enter(std::size_t position, std::vector<Effect>& effects);
    void set_status(SessionStatus status, std::vector<Effect>& effects);
    void append(assessment::Speaker speaker, std::string text);
    ToolResult run_final_analysis(std::vector<Effect>& effects);
    ToolResult transfer(AgentId target, std::vector<Effect>& effects);
    void finish(bool aborted, std::vector<Effect>& effects);

    std::shared_ptr<const AgentTable> agents_;
    std::shared_ptr<const Clock> clock_;
    std::shared_ptr<const Analyzer> analyzer_;
    int max_rounds_;

    std::string session_id_;
    std::int64_t started_s_ = 0;
    std::size_t position_ = 0;
    SessionStatus status_ = SessionStatus::running;
    assessment::AssessmentState state_;
    assessment::Transcript transcript_;
    assessment::TranscriptDigest digest_;
    std::vector<PhaseEntry> phases_;
    int clarification_rounds_ = 0;
    std::vector<std::string> pending_clarifications_;
    std::vector<assessment::Discrepancy> discrepancies_;
    bool analyzed_ = false;
    std::optional<std::int64_t> summary_delivered_s_;
    std::vector<assessment::VideoRef> videos_;
    std::optional<assessment::VideoComponent> pending_video_;
    std::optional<ToolCall> pending_video_call_;
    std::vector<assessment::VideoComponent> video_requested_;
    std::optional<std::string> report_json_;
};

/// Rebuilds an aborted report from a persisted snapshot, the persisted
/// transcript and the registered videos.
assessment::Report report_from_snapshot(const ordered_json& snapshot, const assessment::Transcript& transcript,
                                        const std::vector<assessment::VideoRef>& videos, std::int64_t ended_s);

}  // namespace voice::agents

namespace voice {
VOICE_ENUM_NAMES(agents::SessionStatus, {agents::SessionStatus::running, "running"},
                 {agents::SessionStatus::awaiting_video, "awaiting_video"},
                 {agents::SessionStatus::awaiting_clarification, "awaiting_clarification"},
                 {agents::SessionStatus::finalizing, "finalizing"}, {agents::SessionStatus::ended, "ended"});
}  // namespace voice
