#pragma once

#include "voice/harness/driver.hpp"
#include "voice/harness/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace voice::harness {

struct SuiteOptions {
    DriveOptions drive;
    std::optional<Survey> survey;
};

struct SuiteRun {
    std::vector<CaseRun> runs;  // sorted by scenario id
    MetricsReport metrics;
    std::string metrics_json;

    bool any_errored() const { return metrics.errored > 0; }
};

/// Runs one scenario end to end and scores it against its ground truth.
CaseResult run_case(const Scenario& scenario, std::shared_ptr<const agents::AgentTable> agents,
                    const DriveOptions& options = {}, CaseRun* run_out = nullptr);

SuiteRun run_suite(const std::vector<Scenario>& scenarios, std::shared_ptr<const agents::AgentTable> agents,
                   const SuiteOptions& options = {});

/// Writes `metrics.json` and `reports/<scenario_id>.json` under `out_dir`.
void write_suite(const SuiteRun& suite, const std::filesystem::path& out_dir);

}  // namespace voice::harness
