#include "voice/agents/clock.hpp"
#include "voice/gateway/config.hpp"
#include "voice/gateway/server.hpp"
#include "voice/harness/suite.hpp"

#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace voice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCaseError = 2;
constexpr int kExitUsage = 64;
constexpr int kExitFailure = 1;

struct FixtureArgs {
    fs::path fixtures = "scenarios";
    std::optional<fs::path> agents;
    std::optional<fs::path> survey;
    bool no_faults = false;
};

void add_fixture_options(CLI::App* cmd, FixtureArgs& args) {
    cmd->add_option("--fixtures", args.fixtures, "Scenario directory")->capture_default_str();
    cmd->add_option("--agents", args.agents, "Agent table JSON (built-in table when omitted)");
    cmd->add_option("--survey", args.survey, "Ease-of-use survey JSON (default <fixtures>/feedback/survey.json)");
    cmd->add_flag("--no-faults", args.no_faults, "Run the scenarios without their fault specs");
}

std::shared_ptr<const agents::AgentTable> agent_table(const FixtureArgs& args) {
    if (args.agents) return std::make_shared<const agents::AgentTable>(agents::AgentTable::load(*args.agents));
    return std::make_shared<const agents::AgentTable>(agents::AgentTable::defaults());
}

std::optional<harness::Survey> survey_for(const FixtureArgs& args) {
    const fs::path path = args.survey.value_or(args.fixtures / "feedback" / "survey.json");
    if (!fs::exists(path)) {
        if (args.survey) throw harness::ScenarioError("survey not found: " + path.string());
        return std::nullopt;
    }
    return harness::load_survey(path);
}

harness::SuiteRun run_fixtures(const FixtureArgs& args) {
    const auto scenarios = harness::load_scenarios(args.fixtures, true);
    harness::SuiteOptions options;
    options.drive.apply_faults = !args.no_faults;
    options.survey = survey_for(args);
    return harness::run_suite(scenarios, agent_table(args), options);
}

int cmd_serve(const std::string& listen, const std::optional<fs::path>& data_dir,
              const std::optional<fs::path>& script, const std::optional<std::string>& backend) {
    gateway::ServiceConfig config = gateway::ServiceConfig::from_env([](const char* k) { return std::getenv(k); });
    if (!listen.empty()) config.listen_addr = listen;
    if (data_dir) config.data_dir = *data_dir;
    if (script) config.script_path = *script;
    if (backend) config.backend = *backend;
    config.validate();
    spdlog::info("starting: {}", config.describe());

    gateway::Gateway gw(gateway::make_gateway_config(config));
    const auto [host, port] = gateway::parse_listen_address(config.listen_addr);
    gateway::Server server(gw, host, port);
    server.start();
    spdlog::info("listening on {}:{}", host, server.port());

    boost::asio::io_context signals_ctx;
    boost::asio::signal_set signals(signals_ctx, SIGINT, SIGTERM);
    signals.async_wait([](const boost::system::error_code&, int signal) {
        spdlog::info("signal {} received, shutting down", signal);
    });
    signals_ctx.run();
    server.stop();
    return kExitOk;
}

int cmd_run_suite(const FixtureArgs& args, const fs::path& out_dir) {
    const auto suite = run_fixtures(args);
    harness::write_suite(suite, out_dir);
    std::cout << harness::format_metrics_table(suite.metrics);
    std::cout << "\nwrote " << (out_dir / "metrics.json").string() << " and " << suite.runs.size() << " reports\n";
    return suite.any_errored() ? kExitCaseError : kExitOk;
}

int cmd_run_case(const FixtureArgs& args, const std::string& id, bool trace) {
    const auto scenarios = harness::load_scenarios(args.fixtures, false);
    auto it = std::find_if(scenarios.begin(), scenarios.end(), [&](const harness::Scenario& s) {
        return s.scenario_id == id || s.scenario_id.find(id) != std::string::npos;
    });
    if (it == scenarios.end()) {
        std::cerr << "no scenario matches '" << id << "'\n";
        return kExitUsage;
    }
    harness::DriveOptions options;
    options.apply_faults = !args.no_faults;
    harness::CaseRun run;
    const auto result = harness::run_case(*it, agent_table(args), options, &run);
    if (trace) {
        for (const auto& line : run.client_log) std::cerr << "> " << line << "\n";
        for (const auto& line : run.server_log) std::cerr << "< " << line << "\n";
    }
    if (!run.report_json.empty()) std::cout << run.report_json << "\n";
    if (result.errored) {
        std::cerr << it->scenario_id << ": " << result.error << "\n";
        return kExitCaseError;
    }
    return kExitOk;
}

int cmd_metrics(const FixtureArgs& args) {
    const auto suite = run_fixtures(args);
    std::cout << harness::format_metrics_table(suite.metrics);
    return suite.any_errored() ? kExitCaseError : kExitOk;
}

int cmd_export_report(const fs::path& data_dir, const std::string& session_id) {
    gateway::SessionStore store(data_dir);
    try {
        std::cout << store.load_report(session_id) << "\n";
    } catch (const gateway::NotFound& e) {
        std::cerr << e.what() << "\n";
        return kExitCaseError;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voice-guided stroke assessment service and simulation harness"};
    app.require_subcommand(1);

    std::string listen;
    std::optional<fs::path> serve_data;
    std::optional<fs::path> serve_script;
    std::optional<std::string> serve_backend;
    auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket gateway");
    serve->add_option("--listen", listen, "host:port (overrides VOICE_LISTEN_ADDR)");
    serve->add_option("--data-dir", serve_data, "Session data directory (overrides VOICE_DATA_DIR)");
    serve->add_option("--script", serve_script, "Conversation script for the scripted backend");
    serve->add_option("--backend", serve_backend, "scripted or realtime")->check(CLI::IsMember({"scripted", "realtime"}));

    FixtureArgs suite_args;
    fs::path out_dir = "results";
    auto* run_suite = app.add_subcommand("run-suite", "Run every scenario and write metrics.json plus reports");
    add_fixture_options(run_suite, suite_args);
    run_suite->add_option("--out", out_dir, "Output directory")->capture_default_str();

    FixtureArgs case_args;
    std::string case_id;
    bool case_trace = false;
    auto* run_case = app.add_subcommand("run-case", "Run one scenario and print its report JSON");
    add_fixture_options(run_case, case_args);
    run_case->add_option("scenario", case_id, "Scenario id (or a unique part of it)")->required();
    run_case->add_flag("--trace", case_trace, "Print every protocol message to stderr");

    FixtureArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "Run every scenario and print the metrics table");
    add_fixture_options(metrics, metrics_args);

    fs::path export_dir = "data";
    std::string export_id;
    auto* export_report = app.add_subcommand("export-report", "Print a stored session report");
    export_report->add_option("--data-dir", export_dir, "Session data directory")->capture_default_str();
    export_report->add_option("session_id", export_id, "Session id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("voice"));
    spdlog::set_level(spdlog::level::warn);
    try {
        if (*serve) {
            spdlog::set_level(spdlog::level::info);
            return cmd_serve(listen, serve_data, serve_script, serve_backend);
        }
        if (*run_suite) return cmd_run_suite(suite_args, out_dir);
        if (*run_case) return cmd_run_case(case_args, case_id, case_trace);
        if (*metrics) return cmd_metrics(metrics_args);
        if (*export_report) return cmd_export_report(export_dir, export_id);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
