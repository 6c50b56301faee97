#include "voice/agents/engine.hpp"

#include "voice/assessment/rubric.hpp"
#include "voice/assessment/state_json.hpp"

#include <algorithm>
#include <atomic>

namespace voice::agents {

using namespace voice::assessment;

namespace {

std::string generate_session_id(std::int64_t now_s) {
    static std::atomic<std::uint64_t> counter{0};
    return "s" + std::to_string(now_s) + "-" + std::to_string(++counter);
}

std::optional<VideoComponent> video_component_for(AgentId agent) {
    if (agent == AgentId::facial) return VideoComponent::facial;
    if (agent == AgentId::arm) return VideoComponent::arm;
    return std::nullopt;
}

bool covers(std::string_view field, std::string_view prefix) {
    return field == prefix || (field.size() > prefix.size() && field.starts_with(prefix) && field[prefix.size()] == '.');
}

ordered_json digest_to_json(const TranscriptDigest& digest) {
    ordered_json out = ordered_json::array();
    for (const FieldWrite& w : digest.writes) out.push_back({{"field", w.field}, {"value", w.value}});
    return out;
}

TranscriptDigest digest_from_json(const ordered_json& j) {
    TranscriptDigest d;
    for (const auto& w : j) d.writes.push_back({w.at("field").get<std::string>(), w.at("value").get<std::string>()});
    return d;
}

}  // namespace

ordered_json InstructionBundle::to_json() const {
    ordered_json tool_names = ordered_json::array();
    for (ToolKind t : tools) tool_names.push_back(enum_name(t));
    return {{"agent", enum_name(agent)},
            {"instructions", instructions},
            {"tools", tool_names},
            {"clarifications", clarifications}};
}

Engine::Engine(EngineConfig config)
    : agents_(std::move(config.agents)),
      clock_(std::move(config.clock)),
      analyzer_(std::move(config.analyzer)),
      max_rounds_(config.max_clarification_rounds),
      session_id_(std::move(config.session_id)) {
    if (!agents_) throw ConfigError("engine needs an agent table");
    agents_->validate();
    if (!clock_) clock_ = std::make_shared<SystemClock>();
    if (!analyzer_) analyzer_ = std::make_shared<DeterministicAnalyzer>();
    if (max_rounds_ < 0) throw ConfigError("max_clarification_rounds must be non-negative");
    started_s_ = now();
    if (session_id_.empty()) session_id_ = generate_session_id(started_s_);
    phases_.push_back(PhaseEntry{agents_->flow().front(), 0, started_s_, std::nullopt});
}

std::vector<Effect> Engine::start() {
    std::vector<Effect> effects;
    const AgentDescriptor& d = agents_->descriptor(active_agent());
    effects.emplace_back(PhaseEffect{d.id, status_});
    effects.emplace_back(InstructionsEffect{{d.id, d.instructions, {d.allowed_tools.begin(), d.allowed_tools.end()}, {}}});
    return effects;
}

void Engine::append(Speaker speaker, std::string text) {
    transcript_.push_back(Turn{speaker, std::move(text), now()});
}

void Engine::set_status(SessionStatus status, std::vector<Effect>& effects) {
    if (status_ == status) return;
    status_ = status;
    effects.emplace_back(PhaseEffect{active_agent(), status_});
}

void Engine::enter(std::size_t position, std::vector<Effect>& effects) {
    const std::int64_t t = now();
    phases_.back().exited_s = t;
    position_ = position;
    phases_.push_back(PhaseEntry{active_agent(), position, t, std::nullopt});

    const AgentDescriptor& d = agents_->descriptor(active_agent());
    InstructionBundle bundle{d.id, d.instructions, {d.allowed_tools.begin(), d.allowed_tools.end()}, {}};
    if (status_ == SessionStatus::awaiting_clarification && d.id == AgentId::main) {
        bundle.clarifications = pending_clarifications_;
    }
    effects.emplace_back(PhaseEffect{d.id, status_});
    effects.emplace_back(InstructionsEffect{std::move(bundle)});
}

std::vector<Effect> Engine::advance(const Event& event) {
    if (status_ == SessionStatus::ended) throw StateViolation("session " + session_id_ + " has ended");
    std::vector<Effect> effects;

    if (const auto* user = std::get_if<UserTurnCommitted>(&event)) {
        if (status_ == SessionStatus::awaiting_video) {
            throw StateViolation("user turn while awaiting the " + enum_string(*pending_video_) + " video");
        }
        append(Speaker::user, user->text);
    } else if (const auto* turn = std::get_if<BackendTurn>(&event)) {
        for (const BackendItem& item : turn->items) {
            if (status_ == SessionStatus::ended) {
                effects.emplace_back(ErrorEffect{std::string(tool_error::state_violation),
                                                 "backend output after session end was dropped"});
                break;
            }
            if (const auto* text = std::get_if<AssistantText>(&item)) {
                if (text->text.empty()) continue;
                append(Speaker::assistant, text->text);
                if (status_ == SessionStatus::finalizing && !summary_delivered_s_) summary_delivered_s_ = now();
                effects.emplace_back(SayEffect{text->text});
            } else {
                dispatch_tool(std::get<ToolCall>(item), effects);
            }
        }
    } else {
        const bool registered = std::holds_alternative<VideoRegistered>(event);
        const VideoComponent component = registered ? std::get<VideoRegistered>(event).video.component
                                                    : std::get<VideoSkipped>(event).component;
        if (status_ != SessionStatus::awaiting_video || pending_video_ != component) {
            throw StateViolation("no pending video request for " + enum_string(component));
        }
        ordered_json payload;
        if (registered) {
            const VideoRef& v = std::get<VideoRegistered>(event).video;
            const bool duplicate = std::any_of(videos_.begin(), videos_.end(), [&](const VideoRef& r) {
                return r.video_id == v.video_id || r.component == v.component;
            });
            if (duplicate) throw StateViolation("video " + v.video_id + " is already registered");
            videos_.push_back(v);
            state_.videos.push_back(v);
            append(Speaker::system, "video recorded: " + enum_string(component) + " " + v.video_id);
            payload = {{"video_id", v.video_id}};
        } else {
            append(Speaker::system, "video skipped: " + enum_string(component));
            payload = {{"skipped", true}};
        }
        pending_video_.reset();
        set_status(SessionStatus::running, effects);
        effects.emplace_back(ToolResultEffect{*pending_video_call_, ToolResult::success(std::move(payload))});
        pending_video_call_.reset();
    }
    return effects;
}

ToolResult Engine::dispatch_tool(const ToolCall& call, std::vector<Effect>& effects) {
    const std::size_t insert_at = effects.size();
    const auto fail = [&](std::string_view code, std::string message) {
        effects.emplace_back(ErrorEffect{std::string(code), message});
        ToolResult r = ToolResult::failure(code, std::move(message));
        effects.insert(effects.begin() + static_cast<std::ptrdiff_t>(insert_at), ToolResultEffect{call, r});
        return r;
    };

    if (status_ == SessionStatus::ended) return fail(tool_error::state_violation, "session has ended");
    if (auto problem = validate_arguments(call); !problem.empty()) {
        return fail(tool_error::invalid_arguments, problem);
    }
    const AgentId agent = active_agent();
    if (!agents_->allows(agent, call.kind)) {
        return fail(tool_error::permission_denied,
                    enum_string(call.kind) + " is not allowed for agent " + enum_string(agent));
    }

    ToolResult result;
    switch (call.kind) {
        case ToolKind::update_assessment_state: {
            const std::string field = call.arguments["field"].get<std::string>();
            const ordered_json& value = call.arguments["value"];
            try {
                apply_update(state_, field, value, session_start());
            } catch (const SchemaError& e) {
                return fail(tool_error::invalid_arguments, e.what());
            }
            digest_.writes.push_back(FieldWrite{field, value.dump()});
            append(Speaker::system, "state " + field + " = " + value.dump());
            result = ToolResult::success({{"field", field}, {"value", value}});
            break;
        }
        case ToolKind::start_video_recording: {
            const auto component = *enum_parse<VideoComponent>(call.arguments["component"].get<std::string>());
            if (status_ == SessionStatus::awaiting_video) {
                return fail(tool_error::video_gate, "a video request is already pending");
            }
            if (video_component_for(agent) != component) {
                return fail(tool_error::invalid_arguments,
                            "agent " + enum_string(agent) + " cannot record a " + enum_string(component) + " video");
            }
            const bool have = std::any_of(videos_.begin(), videos_.end(),
                                          [&](const VideoRef& v) { return v.component == component; });
            if (have) return fail(tool_error::state_violation, "a " + enum_string(component) + " video exists");
            pending_video_ = component;
            pending_video_call_ = call;
            if (std::find(video_requested_.begin(), video_requested_.end(), component) == video_requested_.end()) {
                video_requested_.push_back(component);
            }
            set_status(SessionStatus::awaiting_video, effects);
            effects.emplace_back(VideoRequestEffect{component});
            // The result, carrying the video id, is delivered once the video
            // is registered or skipped.
            return ToolResult::success({{"pending", true}});
        }
        case ToolKind::transfer_agent:
            result = transfer(*enum_parse<AgentId>(call.arguments["target"].get<std::string>()), effects);
            if (!result.ok) return fail(result.error_code, result.message);
            break;
        case ToolKind::run_final_analysis:
            result = run_final_analysis(effects);
            break;
        case ToolKind::disconnect:
            result = ToolResult::success({{"ended", true}});
            effects.insert(effects.begin() + static_cast<std::ptrdiff_t>(insert_at), ToolResultEffect{call, result});
            finish(false, effects);
            return result;
    }
    effects.insert(effects.begin() + static_cast<std::ptrdiff_t>(insert_at), ToolResultEffect{call, result});
    return result;
}

ToolResult Engine::transfer(AgentId target, std::vector<Effect>& effects) {
    const AgentId agent = active_agent();
    if (status_ == SessionStatus::awaiting_video) {
        return ToolResult::failure(tool_error::video_gate, "transfer blocked until the pending video is resolved");
    }
    if (auto component = video_component_for(agent);
        component && std::find(video_requested_.begin(), video_requested_.end(), *component) == video_requested_.end()) {
        return ToolResult::failure(tool_error::video_required,
                                   "agent " + enum_string(agent) + " must request a video before transferring");
    }
    if (target == agent) return ToolResult::failure(tool_error::invalid_transfer, "cannot transfer to self");

    std::optional<std::size_t> position;
    if (status_ == SessionStatus::awaiting_clarification && agent == AgentId::main &&
        target == AgentId::final_summary) {
        const auto& flow = agents_->flow();
        for (std::size_t p = position_; p-- > 0;) {
            if (flow[p] == target) {
                position = p;
                break;
            }
        }
    } else {
        position = agents_->next_position(position_, target);
    }
    if (!position) {
        return ToolResult::failure(tool_error::invalid_transfer,
                                   "no transfer from " + enum_string(agent) + " to " + enum_string(target));
    }
    enter(*position, effects);
    return ToolResult::success({{"agent", enum_name(target)}});
}

ToolResult Engine::run_final_analysis(std::vector<Effect>& effects) {
    AnalysisResult analysis = analyzer_->analyze(state_, digest_);
    state_.scores = analysis.corrected_scores;
    state_.reported_total = analysis.corrected_scores.total().value();
    analyzed_ = true;

    ordered_json discrepancies = ordered_json::array();
    const bool clarify = !analysis.clarifications_needed.empty() && clarification_rounds_ < max_rounds_;
    if (!clarify) {
        for (Discrepancy& d : analysis.discrepancies) {
            if (d.resolution == Resolution::clarify_with_user) d.resolution = Resolution::flag_only;
        }
    }
    for (const Discrepancy& d : analysis.discrepancies) discrepancies.push_back(to_json(d));
    discrepancies_ = analysis.discrepancies;

    ordered_json payload{{"scores", to_json(analysis.corrected_scores)},
                         {"stroke_likely", analysis.stroke_likely},
                         {"lvo_likely", analysis.lvo_likely},
                         {"discrepancies", discrepancies}};

    std::optional<std::size_t> main_at;
    if (clarify) {
        ++clarification_rounds_;
        pending_clarifications_ = analysis.clarifications_needed;
        std::erase_if(digest_.writes, [&](const FieldWrite& w) {
            return std::any_of(pending_clarifications_.begin(), pending_clarifications_.end(),
                               [&](const std::string& f) { return covers(w.field, f); });
        });
        append(Speaker::system, "clarification round " + std::to_string(clarification_rounds_));
        payload["status"] = "clarify";
        payload["clarifications"] = pending_clarifications_;
        status_ = SessionStatus::awaiting_clarification;
        const auto& flow = agents_->flow();
        for (std::size_t p = flow.size(); p-- > position_ + 1;) {
            if (flow[p] == AgentId::main) {
                main_at = p;
                break;
            }
        }
    } else {
        pending_clarifications_.clear();
        state_.stroke_likely = analysis.stroke_likely;
        state_.lvo_likely = analysis.lvo_likely;
        state_.summary_narrative = analysis.narrative;
        payload["status"] = "final";
        payload["narrative"] = analysis.narrative;
        status_ = SessionStatus::finalizing;
        main_at = agents_->next_position(position_, AgentId::main);
    }
    if (main_at) {
        enter(*main_at, effects);
    } else {
        effects.emplace_back(PhaseEffect{active_agent(), status_});
    }
    return ToolResult::success(std::move(payload));
}

void Engine::finish(bool aborted, std::vector<Effect>& effects) {
    const std::int64_t t = now();
    phases_.back().exited_s = t;
    ReportContext ctx;
    ctx.session_id = session_id_;
    ctx.timing = SessionTiming{started_s_, t, summary_delivered_s_};
    ctx.aborted = aborted;
    ctx.discrepancies = (analyzed_ && !aborted) ? discrepancies_ : check_consistency(state_, digest_);
    ctx.clarification_rounds = clarification_rounds_;
    Report report = build_report(state_, transcript_, videos_, ctx);
    std::string json = serialize_report(report);
    report_json_ = json;
    pending_video_.reset();
    pending_video_call_.reset();
    status_ = SessionStatus::ended;
    effects.emplace_back(PhaseEffect{active_agent(), status_});
    effects.emplace_back(ReportEffect{std::move(report), std::move(json)});
}

std::vector<Effect> Engine::abort(std::string_view reason) {
    std::vector<Effect> effects;
    if (status_ == SessionStatus::ended) return effects;
    effects.emplace_back(ErrorEffect{"aborted", std::string(reason)});
    finish(true, effects);
    return effects;
}

ordered_json Engine::snapshot() const {
    ordered_json phases = ordered_json::array();
    for (const PhaseEntry& p : phases_) {
        phases.push_back({{"agent", enum_name(p.agent)},
                          {"position", p.position},
                          {"entered_s", p.entered_s},
                          {"exited_s", p.exited_s ? ordered_json(*p.exited_s) : ordered_json(nullptr)}});
    }
    ordered_json videos = ordered_json::array();
    for (const VideoRef& v : videos_) videos.push_back(to_json(v));
    return {{"schema", "voice-session/1"},
            {"session_id", session_id_},
            {"started_s", started_s_},
            {"status", enum_name(status_)},
            {"active_agent", enum_name(active_agent())},
            {"position", position_},
            {"clarification_rounds", clarification_rounds_},
            {"summary_delivered_s",
             summary_delivered_s_ ? ordered_json(*summary_delivered_s_) : ordered_json(nullptr)},
            {"assessment", to_json(state_)},
            {"digest", digest_to_json(digest_)},
            {"videos", videos},
            {"phase_history", phases}};
}

Report report_from_snapshot(const ordered_json& snapshot, const Transcript& transcript,
                            const std::vector<VideoRef>& videos, std::int64_t ended_s) {
    if (snapshot.value("schema", "") != "voice-session/1") throw SchemaError("not a voice-session/1 snapshot");
    const AssessmentState state = assessment_from_json(snapshot.at("assessment"));
    const TranscriptDigest digest = digest_from_json(snapshot.at("digest"));
    ReportContext ctx;
    ctx.session_id = snapshot.at("session_id").get<std::string>();
    ctx.timing.started_s = snapshot.at("started_s").get<std::int64_t>();
    ctx.timing.ended_s = std::max(ended_s, ctx.timing.started_s);
    if (!snapshot.at("summary_delivered_s").is_null()) {
        ctx.timing.summary_delivered_s = snapshot.at("summary_delivered_s").get<std::int64_t>();
    }
    ctx.aborted = true;
    ctx.discrepancies = check_consistency(state, digest);
    ctx.clarification_rounds = snapshot.at("clarification_rounds").get<int>();
    return build_report(state, transcript, videos, ctx);
}

}  // namespace voice::agents
