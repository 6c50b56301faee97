// Acceptance suite: one PASS/FAIL line per primary criterion.

#include "voice/agents/analyzer.hpp"
#include "voice/assessment/report.hpp"
#include "voice/assessment/rubric.hpp"
#include "voice/gateway/base64.hpp"
#include "voice/gateway/gateway.hpp"
#include "voice/gateway/protocol.hpp"
#include "voice/gateway/session_store.hpp"
#include "voice/harness/suite.hpp"
#include "voice/scripted/scripted_backend.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace voice;
using namespace voice::assessment;
using ordered_json = nlohmann::ordered_json;

namespace {

// Pinned limits.
constexpr double kRubricBudgetS = 5.0;
constexpr double kTable1BudgetS = 10.0;
constexpr double kSuiteBudgetS = 60.0;
constexpr int kFuzzMessagesPerTemplate = 10000;
constexpr std::uint32_t kFuzzSeed = 20250314;

const fs::path kSourceDir = VOICE_SOURCE_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    template <class A, class B>
    void equal(const A& actual, const B& expected, const std::string& what) {
        if (!(actual == expected)) {
            std::ostringstream s;
            s << what << ": got " << actual << ", want " << expected;
            failures_.push_back(s.str());
        }
    }
    Outcome outcome(std::string summary) const {
        if (failures_.empty()) return {true, std::move(summary)};
        std::string d;
        for (std::size_t i = 0; i < failures_.size() && i < 6; ++i) d += (i ? "; " : "") + failures_[i];
        if (failures_.size() > 6) d += "; ... " + std::to_string(failures_.size() - 6) + " more";
        return {false, d};
    }

private:
    std::vector<std::string> failures_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_s(double s) {
    std::ostringstream o;
    o.precision(3);
    o << s << " s";
    return o.str();
}

std::shared_ptr<const agents::AgentTable> table() {
    static auto t = std::make_shared<const agents::AgentTable>(agents::AgentTable::load(kSourceDir / "config/agents.json"));
    return t;
}

// ---------------------------------------------------------------- rubric oracle

// Lookup tables written straight from the published scale, indexed by the
// enum ordinal of each finding.
constexpr int kFacialPoints[3] = {0, 1, 1};       // none, left droop, right droop
constexpr int kArmPoints[3] = {0, 1, 2};          // no weakness, drifts, falls / no effort
constexpr int kGazePoints[3] = {0, 1, 2};         // none, partial, forced
constexpr int kNeglectPoints[2][2] = {{2, 1},     // weakness not recognized: arm not / recognized
                                      {1, 0}};    // weakness recognized
// [slurred][items_named][command_performed][mute_or_global]
constexpr int kSpeechPoints[2][4][2][2] = {
    // not slurred
    {{{2, 2}, {2, 2}}, {{1, 2}, {1, 2}}, {{1, 2}, {1, 2}}, {{1, 2}, {0, 2}}},
    // slurred
    {{{2, 2}, {2, 2}}, {{1, 2}, {1, 2}}, {{1, 2}, {1, 2}}, {{1, 2}, {1, 2}}},
};

Outcome rubric_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::optional<FacialPalsy>> facial{std::nullopt};
    for (auto v : {FacialPalsy::none, FacialPalsy::left_droop, FacialPalsy::right_droop}) facial.emplace_back(v);
    std::vector<std::optional<ArmFinding>> arm{std::nullopt};
    for (auto side : {Side::none, Side::left, Side::right, Side::both}) {
        for (auto sev : {ArmSeverity::no_weakness, ArmSeverity::drifts_down, ArmSeverity::falls_rapidly_or_no_effort}) {
            arm.emplace_back(ArmFinding{side, sev});
        }
    }
    std::vector<std::optional<bool>> slurred{std::nullopt, false, true};
    std::vector<std::optional<AphasiaFinding>> aphasia{std::nullopt};
    for (int items = 0; items <= 3; ++items) {
        for (bool cmd : {false, true}) {
            for (bool mute : {false, true}) aphasia.emplace_back(AphasiaFinding{items, cmd, mute});
        }
    }
    std::vector<std::optional<EyeFinding>> eye{std::nullopt, EyeFinding{}};
    for (auto dir : {GazeDirection::left, GazeDirection::right}) {
        for (auto sev : {GazeSeverity::partial, GazeSeverity::forced}) eye.emplace_back(EyeFinding{dir, sev});
    }
    std::vector<std::optional<NeglectFinding>> neglect{std::nullopt};
    for (bool w : {false, true}) {
        for (bool o : {false, true}) neglect.emplace_back(NeglectFinding{w, o});
    }

    long cases = 0, complete = 0, mismatches = 0;
    std::string first_bad;
    for (const auto& fa : facial)
        for (const auto& ar : arm)
            for (const auto& sl : slurred)
                for (const auto& ap : aphasia)
                    for (const auto& ey : eye)
                        for (const auto& ne : neglect) {
                            FastEdFindings f{fa, ar, sl, ap, ey, ne};
                            std::array<std::optional<int>, 5> want{};
                            if (fa) want[0] = kFacialPoints[static_cast<int>(*fa)];
                            if (ar) want[1] = kArmPoints[static_cast<int>(ar->severity)];
                            if (sl && ap) {
                                want[2] = kSpeechPoints[*sl][ap->items_named][ap->command_performed][ap->mute_or_global];
                            }
                            if (ey) want[3] = kGazePoints[static_cast<int>(ey->severity)];
                            if (ne) want[4] = kNeglectPoints[ne->recognizes_weakness][ne->recognizes_own_arm];
                            bool all = true;
                            int sum = 0;
                            for (const auto& w : want) {
                                if (w) {
                                    sum += *w;
                                } else {
                                    all = false;
                                }
                            }
                            const ComponentScores got = score_fast_ed(f);
                            const TotalScore total = total_score(got);
                            ++cases;
                            if (all) ++complete;
                            const bool ok = got.values == want && total.partial_sum == sum && total.complete == all &&
                                            total.value() == (all ? std::optional<int>(sum) : std::nullopt);
                            if (!ok) {
                                ++mismatches;
                                if (first_bad.empty()) first_bad = to_json(f).dump();
                            }
                        }
    const double elapsed = seconds_since(t0);
    Checks c;
    c.equal(mismatches, 0L, "mismatches (first " + first_bad + ")");
    c.expect(complete == 3L * 12 * 2 * 16 * 5 * 4, "complete combinations counted " + std::to_string(complete));
    c.expect(elapsed < kRubricBudgetS, "runtime " + fmt_s(elapsed));
    return c.outcome(std::to_string(cases) + " findings (" + std::to_string(complete) +
                     " fully assessed), 0 mismatches, " + fmt_s(elapsed));
}

// ---------------------------------------------------------------- reference call replay

const std::vector<std::string> kTable1Assistant = {
    "Hello! We'll start with a quick stroke assessment. Can you please tell me the patient's age and sex?",
    "Thank you. I'll update the assessment with this information, and then we'll start the FAST-ED assessment.",
    "Did anyone witness when the symptoms started?",
    "To be precise, can you give me a specific clock time",
    "Please record a video of the patient's facial movements.",
    "Please ask the patient to raise and extend both arms",
    "We're assessing speech now.",
    "Now, let's test for aphasia.",
    "Now, please ask the patient to perform a simple command",
    "Look carefully at the person's eyes.",
    "Okay, we need to check the patient's awareness of the weakness.",
    "Is the patient taking any of these anticoagulant medications",
    "I need a couple more pieces of information.",
    "Do you have any way to check the patient's blood glucose",
    "I'm processing the results now, this may take a minute.",
    "I need to clarify one thing: Is the patient male or female?",
    "Stroke likely; large vessel occlusion likely.",
    "The assessment summary has been provided.",
};

Outcome table1_replay() {
    const auto t0 = std::chrono::steady_clock::now();
    const harness::Scenario scenario = harness::load_scenario(kSourceDir / "scenarios/s01-table1.json");
    harness::DriveOptions options;
    options.mode = harness::InputMode::text;
    const harness::CaseRun run = harness::drive_case(scenario, table(), options);
    const double elapsed = seconds_since(t0);

    Checks c;
    c.expect(!run.errored, "run errored: " + run.error);
    if (!run.report) return c.outcome("");
    const Report& r = *run.report;
    const ComponentScores& s = r.assessment.scores;
    const std::array<std::optional<int>, 5> want{1, 2, 1, 0, 2};
    c.expect(s.values == want, "components " + to_json(s).dump());
    c.expect(s.total().value() == 6, "total " + to_json(s).dump());
    c.expect(r.assessment.stroke_likely == true, "stroke_likely not true");
    c.expect(r.assessment.lvo_likely == true, "lvo_likely not true");
    c.equal(r.clarification_rounds, 1, "clarification rounds");
    c.expect(!r.aborted, "report aborted");

    // The clarification round re-asked sex and nothing else.
    std::size_t round_at = r.transcript.size();
    int rounds = 0;
    for (std::size_t i = 0; i < r.transcript.size(); ++i) {
        if (r.transcript[i].speaker == Speaker::system && r.transcript[i].text.rfind("clarification round", 0) == 0) {
            ++rounds;
            round_at = i;
        }
    }
    c.equal(rounds, 1, "clarification round markers");
    std::vector<std::string> writes_after;
    for (std::size_t i = round_at; i < r.transcript.size(); ++i) {
        const auto& t = r.transcript[i];
        if (t.speaker == Speaker::system && t.text.rfind("state ", 0) == 0) writes_after.push_back(t.text);
    }
    c.expect(writes_after.size() == 1 && writes_after[0] == "state demographics.sex = \"male\"",
             "clarification writes " + std::to_string(writes_after.size()));
    c.expect(r.assessment.demographics.sex == Sex::male, "sex not male");

    int facial = 0, arm = 0;
    for (const auto& v : r.assessment.videos) {
        if (v.component == VideoComponent::facial) ++facial;
        if (v.component == VideoComponent::arm) ++arm;
        c.expect(!v.uri.empty() && !v.video_id.empty(), "video link missing for " + enum_string(v.component));
    }
    c.expect(r.assessment.videos.size() == 2 && facial == 1 && arm == 1,
             "videos " + std::to_string(r.assessment.videos.size()));

    // Spoken turns follow the published transcript.
    std::vector<std::string> assistant, user;
    for (const auto& t : r.transcript) {
        if (t.speaker == Speaker::assistant) assistant.push_back(t.text);
        if (t.speaker == Speaker::user) user.push_back(t.text);
    }
    c.equal(assistant.size(), kTable1Assistant.size(), "assistant turns");
    c.equal(user.size(), std::size_t{15}, "user turns");
    for (std::size_t i = 0; i < std::min(assistant.size(), kTable1Assistant.size()); ++i) {
        c.expect(assistant[i].rfind(kTable1Assistant[i], 0) == 0, "assistant turn " + std::to_string(i + 1) + " differs");
    }
    c.expect(elapsed < kTable1BudgetS, "runtime " + fmt_s(elapsed));
    return c.outcome("components {1,2,1,0,2}, total 6, stroke+LVO likely, 1 clarification (sex), 2 video links, " +
                     std::to_string(assistant.size()) + "+" + std::to_string(user.size()) + " turns in order, " +
                     fmt_s(elapsed));
}

// ---------------------------------------------------------------- metrics reproduction

std::optional<std::int64_t> pct(const harness::Rational& r) { return r.percent(); }

Outcome metrics_reproduction() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scenarios = harness::load_scenarios(kSourceDir / "scenarios", true);
    harness::SuiteOptions options;
    options.survey = harness::load_survey(kSourceDir / "scenarios/feedback/survey.json");
    const harness::SuiteRun suite = harness::run_suite(scenarios, table(), options);
    const double elapsed = seconds_since(t0);
    const harness::MetricsReport& m = suite.metrics;

    Checks c;
    c.equal(m.errored, 0, "errored cases");
    c.equal(m.concordance.pooled.num, 42, "concordant components");
    c.equal(m.concordance.pooled.den, 50, "components");
    c.equal(pct(m.concordance.pooled).value_or(-1), 84, "pooled concordance %");
    const std::array<std::int64_t, 5> per{100, 80, 80, 80, 80};
    for (std::size_t i = 0; i < 5; ++i) {
        c.equal(pct(m.concordance.per_component[i]).value_or(-1), per[i],
                enum_string(kComponents[i]) + " concordance %");
    }
    auto bucket = [&](const std::string& k) {
        auto it = m.total_deltas.find(k);
        return it == m.total_deltas.end() ? 0 : it->second;
    };
    c.equal(bucket("0"), 5, "delta 0");
    c.equal(bucket("1"), 3, "delta 1");
    c.equal(bucket("2"), 2, "delta 2");
    c.equal(bucket("0") + bucket("1") + bucket("2"), 10, "delta buckets");

    c.equal(pct(m.stroke.sensitivity()).value_or(-1), 86, "stroke sensitivity %");
    c.equal(pct(m.stroke.specificity()).value_or(-1), 33, "stroke specificity %");
    c.equal(pct(m.stroke.accuracy()).value_or(-1), 70, "stroke accuracy %");
    c.equal(pct(m.lvo.sensitivity()).value_or(-1), 75, "LVO sensitivity %");
    c.equal(pct(m.lvo.specificity()).value_or(-1), 100, "LVO specificity %");

    const std::map<std::string, std::int64_t> anc{{"sex", 100},          {"prior_stroke", 100}, {"glucose", 100},
                                                  {"age", 90},           {"last_known_well", 90},
                                                  {"symptom_onset", 90}, {"anticoagulants", 80}};
    for (const auto& [field, want] : anc) {
        c.equal(pct(m.ancillary.at(field)).value_or(-1), want, field + " accuracy %");
    }
    c.expect(elapsed < kSuiteBudgetS, "runtime " + fmt_s(elapsed));
    return c.outcome("concordance 84% (100/80/80/80/80), deltas {0:5,1:3,2:2}, stroke 86/33/70, LVO 75/100 "
                     "(LVO accuracy " + std::to_string(pct(m.lvo.accuracy()).value_or(-1)) + "% over strokes, " +
                     std::to_string(pct(m.lvo_all.accuracy()).value_or(-1)) +
                     "% over all cases), ancillary 100/90/90/90/80/100/100, " + fmt_s(elapsed));
}

// ---------------------------------------------------------------- failure modes

Outcome failure_modes() {
    const harness::Scenario clean = harness::load_scenario(kSourceDir / "scenarios/s01-table1.json");
    Checks c;
    c.expect(clean.faults.empty(), "table1 scenario is expected to be fault-free");

    auto run_with = [&](const scripted::FaultSpec& fault, harness::CaseRun& run) {
        harness::DriveOptions options;
        options.extra_faults = {fault};
        return harness::run_case(clean, table(), options, &run);
    };
    auto has_kind = [](const Report& r, DiscrepancyKind k, const std::string& field) {
        for (const auto& d : r.discrepancies) {
            if (d.kind == k && (field.empty() || d.field == field)) return true;
        }
        return false;
    };
    int passed = 0;

    {  // skipped component
        harness::CaseRun run;
        const auto res = run_with(scripted::FaultSpec::skip(Component::neglect), run);
        const bool ok = run.report && has_kind(*run.report, DiscrepancyKind::missing_component, "neglect") &&
                        !res.ai_total.has_value() && !res.component_match[4];
        c.expect(ok, "skip_component(neglect): no missing_component discrepancy");
        passed += ok;
    }
    {  // misscore
        harness::CaseRun run;
        const auto res = run_with(scripted::FaultSpec::misscore(Component::speech, 2), run);
        const bool ok = !res.errored && res.ai_total == 7 && res.total_delta == 1 && !res.component_match[2];
        c.expect(ok, "misscore(speech, 2): total " + std::to_string(res.ai_partial_sum) + ", delta " +
                         std::to_string(res.total_delta));
        passed += ok;
    }
    {  // hallucinated anticoagulant
        harness::CaseRun run;
        const auto res = run_with(scripted::FaultSpec::hallucinate("ancillary.anticoagulants", {"rivaroxaban"}), run);
        bool lists = false;
        if (run.report && run.report->assessment.ancillary.anticoagulants) {
            for (const auto& e : *run.report->assessment.ancillary.anticoagulants) {
                lists = lists || e.drug == Anticoagulant::rivaroxaban;
            }
        }
        const bool ok = !res.errored && lists && !res.ancillary_match.at("anticoagulants");
        c.expect(ok, "hallucinate_field(anticoagulants): mismatch not observed");
        passed += ok;
    }
    {  // garbled transcription
        harness::CaseRun run;
        const auto res = run_with(scripted::FaultSpec::garble(3), run);
        bool garbled_turn = false;
        if (run.report) {
            for (const auto& t : run.report->transcript) {
                garbled_turn = garbled_turn || (t.speaker == Speaker::user && t.text == scripted::kUnintelligible);
            }
        }
        const bool ok = !res.errored && run.reprompts == 1 && garbled_turn;
        c.expect(ok, "garble_transcript(3): reprompts " + std::to_string(run.reprompts));
        passed += ok;
    }
    return c.outcome(std::to_string(passed) + "/4 fault kinds produce their observable "
                     "(missing_component, delta +1, anticoagulant mismatch, reprompt)");
}

// ---------------------------------------------------------------- protocol fuzz

class RecordingSink final : public gateway::Sink {
public:
    void send(std::string text) override { messages.push_back(std::move(text)); }
    void close() override { closed = true; }
    std::vector<std::string> messages;
    bool closed = false;
};

struct FuzzStats {
    long sent = 0;
    long sessions = 0;
    long violations = 0;
    long streamed_reports = 0;
    long dropped_sessions = 0;
    long bad_seq_closes = 0;
    long audio_rejected = 0;
    long audio_accepted = 0;
    std::string first_violation;
    void violation(const std::string& what) {
        if (violations++ == 0) first_violation = what;
    }
};

// Drives one gateway with random client traffic. The client keeps a model
// of what the server must do and counts every divergence.
void fuzz_template(bool voice_mode, FuzzStats& stats, const fs::path& data_dir) {
    using gateway::Envelope;
    namespace msg = gateway::msg;
    std::mt19937 rng(kFuzzSeed + (voice_mode ? 1 : 0));
    const harness::Scenario scenario = harness::load_scenario(kSourceDir / "scenarios/s01-table1.json");
    const auto script = scripted::load_script(scenario.script_path, *table());

    auto clock = std::make_shared<agents::ManualClock>(scenario.clock_start_s);
    gateway::GatewayConfig config;
    config.agents = table();
    config.clock = clock;
    config.analyzer = std::make_shared<agents::DeterministicAnalyzer>();
    config.backend_factory = [script](const std::string&) { return std::make_unique<scripted::ScriptedBackend>(script); };
    config.data_dir = data_dir;
    config.session_prefix = voice_mode ? "fuzzv" : "fuzzt";
    gateway::Gateway gw(config);
    gateway::SessionStore store(data_dir);

    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
    auto caller_line = [&]() -> const std::string& {
        return scenario.caller[static_cast<std::size_t>(pick(static_cast<int>(scenario.caller.size())))].say;
    };
    const std::vector<std::string> junk_types{"bogus", "ptt.start", "", "video.completed", "session.accepted"};

    long budget = kFuzzMessagesPerTemplate;
    while (budget > 0) {
        ++stats.sessions;
        auto sink = std::make_shared<RecordingSink>();
        auto conn = gw.connect(sink);
        std::optional<std::int64_t> last_seq;
        bool started = false, ptt_open = false;
        std::size_t seen = 0;
        std::string session_id;
        int reports = 0;
        std::string streamed_report;
        std::int64_t last_out_seq = 0;

        while (budget > 0 && !sink->closed) {
            --budget;
            ++stats.sent;
            const int roll = pick(100);
            std::string type;
            ordered_json payload = ordered_json::object();
            const std::int64_t next = last_seq ? *last_seq + 1 : pick(3);
            std::int64_t seq = next + (pick(10) == 0 ? pick(5) : 0);
            bool raw_garbage = false;

            if (!started && roll < 60) {
                type = msg::session_start;
                payload = {{"proto", pick(10) == 0 ? "voice/0" : "voice/1"}, {"mode", voice_mode ? "voice" : "text"}};
            } else if (roll < 3) {
                raw_garbage = true;
            } else if (roll < 5) {
                seq = last_seq ? *last_seq - pick(3) : -1 - pick(3);  // replayed, stale or negative
                type = msg::text_turn;
                payload = {{"text", "hello"}};
            } else if (roll < 25) {
                type = msg::audio_frame;
                const std::size_t n = pick(20) == 0 ? 5000 : static_cast<std::size_t>(pick(2400) + 1);
                payload = {{"pcm16_b64", gateway::encode_pcm16(std::vector<std::int16_t>(n, 7))}};
                if (pick(15) == 0) payload = {{"pcm16_b64", "%%%not-base64"}};
            } else if (roll < 35) {
                type = msg::ptt_begin;
            } else if (roll < 45) {
                type = msg::ptt_end;
                payload = {{"caption", caller_line()}};
            } else if (roll < 75) {
                type = msg::text_turn;
                payload = {{"text", pick(4) == 0 ? std::string("something else entirely") : caller_line()}};
            } else if (roll < 85) {
                type = msg::video_complete;
                payload = {{"video_id", "v-unknown"}};
                if (!session_id.empty() && pick(3) != 0) {
                    for (const char* component : {"facial", "arm"}) {
                        try {
                            payload["video_id"] =
                                gw.upload_video(session_id, component, "\x1a\x45\xdf\xa3 clip", "video/webm", 5.0);
                        } catch (const gateway::UploadError&) {
                        }
                    }
                }
            } else if (roll < 88) {
                type = msg::video_skip;
            } else if (roll < 95) {
                type = junk_types[static_cast<std::size_t>(pick(static_cast<int>(junk_types.size())))];
            } else if (roll < 96) {
                type = msg::session_end;
            } else {
                type = msg::session_start;
                payload = {{"proto", "voice/1"}, {"mode", "text"}};
            }
            clock->advance(pick(20));

            std::string text;
            if (raw_garbage) {
                text = pick(2) ? "{not json" : R"({"type":"text.turn","payload":{}})";
            } else {
                text = Envelope{type, session_id, seq, payload}.serialize();
            }
            const bool was_audio = type == msg::audio_frame && !raw_garbage;
            const bool bad_seq = !raw_garbage && (seq < 0 || (last_seq && seq <= *last_seq));
            const bool ptt_before = ptt_open;

            conn->on_message(text);

            bool got_bad_seq = false, got_ptt_closed = false;
            for (; seen < sink->messages.size(); ++seen) {
                const Envelope e = Envelope::parse(sink->messages[seen], std::numeric_limits<std::size_t>::max());
                if (e.seq != last_out_seq + 1) stats.violation("server seq not consecutive");
                last_out_seq = e.seq;
                if (e.type == msg::error) {
                    const std::string code = e.payload.value("code", "");
                    got_bad_seq = got_bad_seq || code == gateway::code::bad_seq;
                    got_ptt_closed = got_ptt_closed || code == gateway::code::ptt_closed;
                } else if (e.type == msg::ptt_ack) {
                    ptt_open = e.payload.value("mic", "") == "open";
                } else if (e.type == msg::session_accepted) {
                    started = true;
                    session_id = e.payload.value("session_id", "");
                } else if (e.type == msg::report_final) {
                    ++reports;
                    streamed_report = e.payload.value("report_json", "");
                }
            }
            if (!raw_garbage && !bad_seq) last_seq = seq;

            if (bad_seq) ++stats.bad_seq_closes;
            if (was_audio && !bad_seq && started) ++(got_ptt_closed ? stats.audio_rejected : stats.audio_accepted);
            if (bad_seq) {
                if (!got_bad_seq) stats.violation("stale seq " + std::to_string(seq) + " accepted");
                if (!sink->closed) stats.violation("connection kept after BAD_SEQ");
                if (started && reports != 1) stats.violation("BAD_SEQ close without report.final");
            }
            if (was_audio && !bad_seq && started && ptt_before == got_ptt_closed) {
                stats.violation(ptt_before ? "audio inside push-to-talk rejected" : "audio outside push-to-talk accepted");
            }
            if (reports > 1) stats.violation("more than one report.final");
            if (reports == 1 && !sink->closed) stats.violation("connection open after report.final");
        }

        const bool server_closed = sink->closed;
        if (!server_closed) conn->on_close();
        if (!started) continue;
        stats.streamed_reports += reports;
        stats.dropped_sessions += server_closed ? 0 : 1;
        if (server_closed && reports != 1) {
            stats.violation("session " + session_id + " closed with " + std::to_string(reports) + " reports");
        }
        if (!server_closed && reports != 0) stats.violation("report.final on an open connection");
        std::string persisted;
        try {
            persisted = store.load_report(session_id);
        } catch (const std::exception& e) {
            stats.violation(std::string("no persisted report: ") + e.what());
            continue;
        }
        if (gw.load_report(session_id) != persisted) stats.violation("gateway and store reports differ");
        if (server_closed && persisted != streamed_report) stats.violation("persisted report differs from stream");
    }
}

Outcome protocol_fuzz() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = fs::temp_directory_path() / ("voice-fuzz-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    FuzzStats text_stats, voice_stats;
    fuzz_template(false, text_stats, dir / "text");
    fuzz_template(true, voice_stats, dir / "voice");
    fs::remove_all(dir);
    Checks c;
    c.equal(text_stats.violations, 0L, "text-mode violations (first: " + text_stats.first_violation + ")");
    c.equal(voice_stats.violations, 0L, "voice-mode violations (first: " + voice_stats.first_violation + ")");
    c.expect(text_stats.sent == kFuzzMessagesPerTemplate && voice_stats.sent == kFuzzMessagesPerTemplate,
             "message count");
    const auto sum = [&](long FuzzStats::*field) { return std::to_string(text_stats.*field + voice_stats.*field); };
    c.expect(text_stats.streamed_reports > 0 && voice_stats.streamed_reports > 0, "no report.final observed");
    c.expect(text_stats.audio_rejected > 0 && voice_stats.audio_accepted > 0, "push-to-talk paths not exercised");
    return c.outcome(std::to_string(text_stats.sent) + " text-mode + " + std::to_string(voice_stats.sent) +
                     " voice-mode messages over " + sum(&FuzzStats::sessions) + " sessions (" +
                     sum(&FuzzStats::streamed_reports) + " streamed reports, " + sum(&FuzzStats::dropped_sessions) +
                     " dropped, " + sum(&FuzzStats::bad_seq_closes) + " BAD_SEQ closes, " +
                     sum(&FuzzStats::audio_rejected) + " frames rejected outside push-to-talk, " +
                     sum(&FuzzStats::audio_accepted) + " accepted inside), 0 violations, " + fmt_s(seconds_since(t0)));
}

// ---------------------------------------------------------------- replay determinism

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome replay_determinism() {
    const auto scenarios = harness::load_scenarios(kSourceDir / "scenarios", true);
    harness::SuiteOptions options;
    options.survey = harness::load_survey(kSourceDir / "scenarios/feedback/survey.json");
    const fs::path base = fs::temp_directory_path() / ("voice-replay-" + std::to_string(::getpid()));
    fs::remove_all(base);
    harness::write_suite(harness::run_suite(scenarios, table(), options), base / "a");
    harness::write_suite(harness::run_suite(scenarios, table(), options), base / "b");

    Checks c;
    c.expect(slurp(base / "a/metrics.json") == slurp(base / "b/metrics.json"), "metrics.json differs");
    int reports = 0;
    for (const auto& s : scenarios) {
        const fs::path rel = fs::path("reports") / (s.scenario_id + ".json");
        const std::string a = slurp(base / "a" / rel);
        c.expect(!a.empty(), rel.string() + " missing");
        c.expect(a == slurp(base / "b" / rel), rel.string() + " differs");
        ++reports;
    }
    fs::remove_all(base);
    return c.outcome("metrics.json and " + std::to_string(reports) + " reports byte-identical across two runs");
}

// ---------------------------------------------------------------- descriptive statistics

Outcome descriptive_statistics() {
    Checks c;
    const auto t = harness::timing_stats({333, 375, 417});
    c.expect(t.mean_s == 375.0, "timing mean");
    c.expect(t.sd_s && *t.sd_s == 42.0, "timing SD");

    const auto ease = harness::likert_summary({5, 5, 4});
    c.equal(harness::decimal_half_away(ease.mean.num, ease.mean.den, 2), std::string("4.67"), "ease mean");

    std::vector<int> confidence;
    for (const auto& s : harness::load_scenarios(kSourceDir / "scenarios", true)) {
        if (s.user_confidence) confidence.push_back(*s.user_confidence);
    }
    c.equal(confidence.size(), std::size_t{10}, "confidence ratings");
    const auto conf = harness::likert_summary(confidence);
    c.expect(conf.median == 4.5, "confidence median");
    c.equal(conf.iqr_low, 4, "confidence IQR low");
    c.equal(conf.iqr_high, 5, "confidence IQR high");
    return c.outcome("timing mean 375 s, SD 42 s; ease mean 4.67; confidence median 4.5, IQR 4-5");
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"rubric oracle equivalence", rubric_oracle},
        {"reference call end-to-end replay", table1_replay},
        {"metrics reproduction", metrics_reproduction},
        {"failure-mode reproduction", failure_modes},
        {"protocol properties", protocol_fuzz},
        {"replay determinism", replay_determinism},
        {"descriptive statistics", descriptive_statistics},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
