#include "voice/harness/driver.hpp"

#include "voice/agents/analyzer.hpp"
#include "voice/agents/clock.hpp"
#include "voice/gateway/base64.hpp"
#include "voice/gateway/gateway.hpp"
#include "voice/gateway/protocol.hpp"
#include "voice/scripted/scripted_backend.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace voice::harness {

using gateway::Envelope;
namespace msg = gateway::msg;

namespace {

class CollectingSink final : public gateway::Sink {
public:
    void send(std::string text) override {
        std::lock_guard lock(mutex_);
        messages_.push_back(std::move(text));
    }
    void close() override {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }

    std::vector<std::string> take_from(std::size_t index) const {
        std::lock_guard lock(mutex_);
        if (index >= messages_.size()) return {};
        return {messages_.begin() + static_cast<std::ptrdiff_t>(index), messages_.end()};
    }
    bool closed() const {
        std::lock_guard lock(mutex_);
        return closed_;
    }

private:
    mutable std::mutex mutex_;
    std::vector<std::string> messages_;
    bool closed_ = false;
};

std::size_t word_count(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

// A caller needs roughly one second per 2.5 spoken words to listen.
std::int64_t listening_seconds(std::size_t words) {
    return static_cast<std::int64_t>((words * 2 + 4) / 5);
}

std::string synthetic_video(const std::string& session_id, assessment::VideoComponent component, int seconds) {
    std::string bytes = "\x1a\x45\xdf\xa3";  // EBML magic
    bytes += "synthetic " + enum_string(component) + " clip for " + session_id + ", " + std::to_string(seconds) + " s";
    return bytes;
}

class Driver {
public:
    Driver(const Scenario& scenario, std::shared_ptr<const agents::AgentTable> agents, const DriveOptions& options)
        : scenario_(scenario), options_(options), clock_(std::make_shared<agents::ManualClock>(scenario.clock_start_s)) {
        scripted::ConversationScript script = scripted::load_script(scenario.script_path, *agents);
        std::vector<scripted::FaultSpec> faults;
        if (options.apply_faults) faults = scenario.faults;
        faults.insert(faults.end(), options.extra_faults.begin(), options.extra_faults.end());
        for (const auto& f : faults) script = scripted::inject_fault(script, f, *agents);

        gateway::GatewayConfig config;
        config.agents = std::move(agents);
        config.clock = clock_;
        config.analyzer = std::make_shared<agents::DeterministicAnalyzer>();
        config.backend_factory = [script](const std::string&) {
            return std::make_unique<scripted::ScriptedBackend>(script);
        };
        config.data_dir = options.data_dir;
        config.session_prefix = scenario.scenario_id;
        gateway_ = std::make_unique<gateway::Gateway>(std::move(config));
        sink_ = std::make_shared<CollectingSink>();
        connection_ = gateway_->connect(sink_);
    }

    CaseRun run() {
        run_.scenario_id = scenario_.scenario_id;
        try {
            loop();
        } catch (const std::exception& e) {
            fail(e.what());
        }
        if (!run_.errored && run_.report_json.empty()) fail("no report.final received");
        if (!run_.report_json.empty()) {
            try {
                run_.report = assessment::parse_report(run_.report_json);
            } catch (const std::exception& e) {
                fail(std::string("report does not parse: ") + e.what());
            }
        }
        return std::move(run_);
    }

private:
    void fail(const std::string& why) {
        if (!run_.errored) {
            run_.errored = true;
            run_.error = why;
        }
    }

    void send(std::string_view type, ordered_json payload) {
        Envelope e{std::string(type), run_.session_id, ++seq_, std::move(payload)};
        std::string text = e.serialize();
        run_.client_log.push_back(text);
        connection_->on_message(text);
    }

    // Reads everything new from the sink. Returns true once report.final arrived.
    bool pump() {
        for (auto& text : sink_->take_from(consumed_)) {
            ++consumed_;
            run_.server_log.push_back(text);
            const Envelope e = Envelope::parse(text, std::numeric_limits<std::size_t>::max());
            if (e.type == msg::session_accepted) {
                run_.session_id = e.payload.value("session_id", "");
            } else if (e.type == msg::assistant_text) {
                const std::string said = e.payload.value("text", "");
                if (said.rfind(scripted::kRepromptPrefix, 0) == 0) ++run_.reprompts;
                heard_ += " " + said;
                words_ += word_count(said);
            } else if (e.type == msg::video_request) {
                pending_video_ = enum_parse<assessment::VideoComponent>(e.payload.value("component", ""));
            } else if (e.type == msg::error) {
                ++run_.error_messages;
                last_error_ = e.payload.dump();
            } else if (e.type == msg::report_final) {
                run_.report_json = e.payload.value("report_json", "");
                return true;
            }
        }
        return false;
    }

    const CallerLine* choose_line() {
        // Asked to repeat: say the same thing again.
        if (last_line_ && heard_.find(scripted::kRepromptPrefix) != std::string::npos) return last_line_;
        const std::string prompt = scripted::normalize_text(heard_);
        for (std::size_t i = caller_cursor_; i < scenario_.caller.size(); ++i) {
            if (scripted::keywords_match(scenario_.caller[i].when, prompt)) {
                caller_cursor_ = i + 1;
                last_line_ = &scenario_.caller[i];
                return last_line_;
            }
        }
        return last_line_;
    }

    void speak(const std::string& line) {
        if (options_.mode == InputMode::text) {
            send(msg::text_turn, {{"text", line}});
            return;
        }
        send(msg::ptt_begin, ordered_json::object());
        const std::vector<std::int16_t> silence(2400, 0);
        const std::size_t frames = std::max<std::size_t>(1, word_count(line));
        for (std::size_t i = 0; i < frames; ++i) {
            send(msg::audio_frame, {{"pcm16_b64", gateway::encode_pcm16(silence)}, {"samples", silence.size()}});
        }
        send(msg::ptt_end, {{"caption", line}});
    }

    void loop() {
        send(msg::session_start, {{"proto", gateway::kProtocolVersion}, {"mode", options_.mode == InputMode::text ? "text" : "voice"}});
        for (int step = 0; step < options_.max_messages; ++step) {
            if (pump()) return;
            if (sink_->closed()) {
                fail("connection closed before report.final");
                return;
            }
            if (pending_video_) {
                const auto component = *pending_video_;
                pending_video_.reset();
                const int seconds = scenario_.video_seconds.at(component);
                clock_->advance(seconds);
                const std::string id =
                    gateway_->upload_video(run_.session_id, enum_name(component),
                                           synthetic_video(run_.session_id, component, seconds), "video/webm", seconds);
                send(msg::video_complete, {{"video_id", id}});
                continue;
            }
            const CallerLine* line = choose_line();
            if (!line) {
                fail("no caller line matches: " + heard_);
                break;
            }
            clock_->advance(scenario_.turn_seconds + listening_seconds(words_));
            heard_.clear();
            words_ = 0;
            speak(line->say);
        }
        if (!run_.errored) fail("message budget exhausted" + (last_error_.empty() ? "" : "; last error " + last_error_));
        // Close out so the report still records what was captured.
        send(msg::session_end, ordered_json::object());
        pump();
    }

    const Scenario& scenario_;
    DriveOptions options_;
    std::shared_ptr<agents::ManualClock> clock_;
    std::unique_ptr<gateway::Gateway> gateway_;
    std::shared_ptr<CollectingSink> sink_;
    std::shared_ptr<gateway::Connection> connection_;

    CaseRun run_;
    std::int64_t seq_ = 0;
    std::size_t consumed_ = 0;
    std::string heard_;
    std::size_t words_ = 0;
    std::optional<assessment::VideoComponent> pending_video_;
    std::size_t caller_cursor_ = 0;
    const CallerLine* last_line_ = nullptr;
    std::string last_error_;
};

}  // namespace

CaseRun drive_case(const Scenario& scenario, std::shared_ptr<const agents::AgentTable> agents,
                   const DriveOptions& options) {
    try {
        Driver driver(scenario, std::move(agents), options);
        return driver.run();
    } catch (const std::exception& e) {
        CaseRun run;
        run.scenario_id = scenario.scenario_id;
        run.errored = true;
        run.error = e.what();
        return run;
    }
}

}  // namespace voice::harness
