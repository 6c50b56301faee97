#include "voice/gateway/conversation.hpp"

#include "voice/gateway/base64.hpp"

#include <spdlog/spdlog.h>

#include <deque>

namespace voice::gateway {

using namespace voice::agents;

ServerMessage error_message(std::string_view code, std::string detail) {
    return {std::string(msg::error), {{"code", code}, {"detail", std::move(detail)}}};
}

Conversation::Conversation(std::unique_ptr<Engine> engine, std::unique_ptr<Backend> backend, bool voice_mode)
    : engine_(std::move(engine)), backend_(std::move(backend)), voice_mode_(voice_mode) {}

void Conversation::start(Outbox& out) {
    BackendEvents first;
    for (const Effect& e : engine_->start()) {
        if (const auto* instr = std::get_if<InstructionsEffect>(&e)) {
            first = backend_->begin(instr->bundle);
        } else if (const auto* phase = std::get_if<PhaseEffect>(&e)) {
            out.push_back({std::string(msg::state_phase),
                           {{"agent_id", enum_name(phase->agent)}, {"status", enum_name(phase->status)}}});
        }
    }
    drain(std::move(first), out);
}

void Conversation::user_turn(const UserInput& input, Outbox& out) {
    if (engine_->status() == SessionStatus::ended) throw StateViolation("session has ended");
    if (engine_->status() == SessionStatus::awaiting_video) {
        throw StateViolation("a video request is pending");
    }
    BackendEvents events;
    user_committed_ = false;
    pending_user_text_ = input.text;
    try {
        events = backend_->user_turn(input);
    } catch (const std::exception& e) {
        // The turn still happened; record what was said before reporting.
        drain({}, out);
        out.push_back(error_message(code::backend_error, e.what()));
        return;
    }
    drain(std::move(events), out);
}

void Conversation::video_registered(const assessment::VideoRef& video, Outbox& out) {
    drain(apply(engine_->advance(VideoRegistered{video}), out), out);
}

void Conversation::video_skipped(assessment::VideoComponent component, Outbox& out) {
    drain(apply(engine_->advance(VideoSkipped{component}), out), out);
}

void Conversation::abort(std::string_view reason, Outbox& out) {
    apply(engine_->abort(reason), out);
}

void Conversation::drain(BackendEvents events, Outbox& out) {
    std::deque<BackendEvent> queue(std::make_move_iterator(events.begin()), std::make_move_iterator(events.end()));
    const auto commit_user = [&](std::string text) {
        if (user_committed_) return;
        user_committed_ = true;
        engine_->advance(UserTurnCommitted{text});
        out.push_back({std::string(msg::transcript_user), {{"text", std::move(text)}}});
    };

    while (!queue.empty() && !ended()) {
        BackendEvent event = std::move(queue.front());
        queue.pop_front();
        if (auto* heard = std::get_if<UserTranscript>(&event)) {
            commit_user(std::move(heard->text));
            continue;
        }
        commit_user(pending_user_text_);
        BackendEvents follow_up;
        if (auto* text = std::get_if<AssistantText>(&event)) {
            follow_up = apply(engine_->advance(BackendTurn{{*text}}), out);
        } else if (auto* call = std::get_if<ToolCall>(&event)) {
            follow_up = apply(engine_->advance(BackendTurn{{*call}}), out);
        } else if (auto* audio = std::get_if<AssistantAudio>(&event)) {
            if (!voice_mode_) continue;
            for (std::size_t at = 0; at < audio->pcm.size(); at += kMaxFrameSamples) {
                const std::size_t n = std::min(kMaxFrameSamples, audio->pcm.size() - at);
                std::vector<std::int16_t> chunk(audio->pcm.begin() + static_cast<std::ptrdiff_t>(at),
                                                audio->pcm.begin() + static_cast<std::ptrdiff_t>(at + n));
                out.push_back({std::string(msg::assistant_audio_frame), {{"pcm16_b64", encode_pcm16(chunk)}}});
            }
        }
        queue.insert(queue.begin(), std::make_move_iterator(follow_up.begin()),
                     std::make_move_iterator(follow_up.end()));
    }
    if (!ended()) commit_user(pending_user_text_);
}

BackendEvents Conversation::apply(const std::vector<Effect>& effects, Outbox& out) {
    BackendEvents follow_up;
    const auto append = [&](BackendEvents more) {
        follow_up.insert(follow_up.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    };
    for (const Effect& effect : effects) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, SayEffect>) {
                    out.push_back({std::string(msg::assistant_text), {{"text", e.text}, {"final", true}}});
                } else if constexpr (std::is_same_v<T, VideoRequestEffect>) {
                    out.push_back({std::string(msg::video_request),
                                   {{"component", enum_name(e.component)},
                                    {"upload_path", "/sessions/" + engine_->session_id() + "/videos/" +
                                                        enum_string(e.component)}}});
                } else if constexpr (std::is_same_v<T, PhaseEffect>) {
                    out.push_back({std::string(msg::state_phase),
                                   {{"agent_id", enum_name(e.agent)}, {"status", enum_name(e.status)}}});
                } else if constexpr (std::is_same_v<T, InstructionsEffect>) {
                    if (!ended()) append(backend_->set_instructions(e.bundle));
                } else if constexpr (std::is_same_v<T, ToolResultEffect>) {
                    if (!ended()) append(backend_->tool_result(e.call, e.result));
                } else if constexpr (std::is_same_v<T, ReportEffect>) {
                    out.push_back({std::string(msg::report_final), {{"report_json", e.json}}});
                } else if constexpr (std::is_same_v<T, ErrorEffect>) {
                    spdlog::warn("session {}: {}: {}", engine_->session_id(), e.code, e.message);
                }
            },
            effect);
    }
    return follow_up;
}

}  // namespace voice::gateway
