#include "voice/harness/suite.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>

namespace voice::harness {

CaseResult run_case(const Scenario& scenario, std::shared_ptr<const agents::AgentTable> agents,
                    const DriveOptions& options, CaseRun* run_out) {
    CaseRun run = drive_case(scenario, std::move(agents), options);
    CaseResult result = run.report ? evaluate_case(scenario, *run.report) : errored_case(scenario, run.error);
    if (run.errored) {
        result.errored = true;
        result.error = run.error;
        spdlog::warn("scenario {} errored: {}", scenario.scenario_id, run.error);
    }
    if (run_out) *run_out = std::move(run);
    return result;
}

SuiteRun run_suite(const std::vector<Scenario>& scenarios, std::shared_ptr<const agents::AgentTable> agents,
                   const SuiteOptions& options) {
    std::vector<const Scenario*> order;
    for (const auto& s : scenarios) order.push_back(&s);
    std::sort(order.begin(), order.end(),
              [](const Scenario* a, const Scenario* b) { return a->scenario_id < b->scenario_id; });

    SuiteRun suite;
    std::vector<CaseResult> results;
    for (const Scenario* s : order) {
        CaseRun run;
        results.push_back(run_case(*s, agents, options.drive, &run));
        suite.runs.push_back(std::move(run));
    }
    suite.metrics = compute_metrics(std::move(results), options.survey);
    suite.metrics_json = metrics_to_json(suite.metrics);
    return suite;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_suite(const SuiteRun& suite, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir / "reports");
    write_file(out_dir / "metrics.json", suite.metrics_json);
    for (const auto& run : suite.runs) {
        if (run.report_json.empty()) continue;
        write_file(out_dir / "reports" / (run.scenario_id + ".json"), run.report_json + "\n");
    }
}

}  // namespace voice::harness
