#pragma once

#include "voice/agents/agent_table.hpp"
#include "voice/assessment/report.hpp"
#include "voice/harness/scenario.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace voice::harness {

enum class InputMode { text, voice };

struct DriveOptions {
    bool apply_faults = true;
    /// Faults injected on top of (or, with apply_faults off, instead of) the
    /// scenario's own.
    std::vector<scripted::FaultSpec> extra_faults;
    InputMode mode = InputMode::text;
    std::optional<std::filesystem::path> data_dir;
    int max_messages = 400;
};

/// Outcome of driving one scenario through an in-process gateway.
struct CaseRun {
    std::string scenario_id;
    std::string session_id;
    bool errored = false;
    std::string error;
    std::string report_json;  // as streamed in report.final
    std::optional<assessment::Report> report;
    std::vector<std::string> server_log;  // every envelope the gateway sent
    std::vector<std::string> client_log;  // every envelope the driver sent
    int error_messages = 0;
    int reprompts = 0;
};

/// Plays the scenario's caller against the scripted backend: session.start,
/// one caller line per assistant prompt, a synthetic upload for each video
/// request, until report.final. Never throws for protocol trouble; the run is
/// marked errored instead.
CaseRun drive_case(const Scenario& scenario, std::shared_ptr<const agents::AgentTable> agents,
                   const DriveOptions& options = {});

}  // namespace voice::harness
