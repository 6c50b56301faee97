#include "voice/gateway/gateway.hpp"

#include "voice/gateway/base64.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace voice::gateway {

using namespace voice::agents;
using assessment::VideoComponent;
using assessment::VideoRef;

std::string caption_transcriber(const std::vector<std::int16_t>&, const std::string& caption) {
    return caption;
}

// ---------------------------------------------------------------------------
// Connection

Connection::Connection(Gateway& gateway, std::shared_ptr<Sink> sink)
    : gateway_(gateway), sink_(std::move(sink)), last_activity_s_(gateway.config_.clock->now_s()) {}

bool Connection::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::string Connection::session_id() const {
    std::lock_guard lock(mutex_);
    return session_id_;
}

void Connection::on_message(std::string_view text) {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    last_activity_s_ = gateway_.config_.clock->now_s();
    Outbox out;
    Envelope envelope;
    try {
        envelope = Envelope::parse(text);
    } catch (const ProtocolError& e) {
        out.push_back(error_message(e.code(), e.what()));
        flush(out);
        return;
    }
    if (envelope.seq < 0 || (last_in_seq_ && envelope.seq <= *last_in_seq_)) {
        out.push_back(error_message(code::bad_seq, "seq " + std::to_string(envelope.seq) + " after " +
                                                       (last_in_seq_ ? std::to_string(*last_in_seq_) : "start")));
        terminate("sequence violation", out);
        return;
    }
    last_in_seq_ = envelope.seq;
    handle(envelope, out);
    flush(out);
}

void Connection::handle(const Envelope& e, Outbox& out) {
    const std::string& type = e.type;
    if (!is_client_type(type)) {
        out.push_back(error_message(code::unknown_type, "unknown message type '" + type + "'"));
        return;
    }
    if (type == msg::session_start) {
        if (conversation_) {
            out.push_back(error_message(code::already_started, "session " + session_id_ + " already started"));
            return;
        }
        start_session(e.payload, out);
        return;
    }
    if (!conversation_) {
        out.push_back(error_message(code::no_session, "send session.start first"));
        return;
    }
    Engine& engine = conversation_->engine();

    if (type == msg::ptt_begin) {
        if (ptt_open_) {
            out.push_back(error_message(code::ptt_open, "push-to-talk is already open"));
        } else if (engine.status() == SessionStatus::awaiting_video) {
            out.push_back(error_message(code::video_pending, "finish or skip the video first"));
        } else {
            ptt_open_ = true;
            audio_overflow_ = false;
            audio_.clear();
            out.push_back({std::string(msg::ptt_ack), {{"mic", "open"}}});
        }
    } else if (type == msg::audio_frame) {
        if (!ptt_open_) {
            out.push_back(error_message(code::ptt_closed, "audio outside a push-to-talk window was dropped"));
            return;
        }
        const auto& p = e.payload;
        if (!p.contains("pcm16_b64") || !p["pcm16_b64"].is_string()) {
            out.push_back(error_message(code::bad_payload, "audio.frame needs pcm16_b64"));
            return;
        }
        if (p.contains("samples") && (!p["samples"].is_number_integer() || p["samples"].get<std::int64_t>() < 0)) {
            out.push_back(error_message(code::bad_payload, "samples must be a non-negative integer"));
            return;
        }
        if (p.contains("samples") && p["samples"].get<std::uint64_t>() > kMaxFrameSamples) {
            out.push_back(error_message(code::frame_too_large, "frame exceeds 4096 samples"));
            return;
        }
        auto pcm = decode_pcm16(p["pcm16_b64"].get<std::string>());
        if (!pcm) {
            out.push_back(error_message(code::bad_frame, "pcm16_b64 is not valid PCM16 base64"));
            return;
        }
        if (pcm->size() > kMaxFrameSamples) {
            out.push_back(error_message(code::frame_too_large, "frame exceeds 4096 samples"));
            return;
        }
        if (p.contains("samples") && p["samples"].get<std::uint64_t>() != pcm->size()) {
            out.push_back(error_message(code::bad_frame, "samples does not match the decoded frame"));
            return;
        }
        if (audio_.size() + pcm->size() > kMaxTurnSamples) {
            if (!audio_overflow_) {
                out.push_back(error_message(code::audio_limit, "turn audio is capped at 120 s; further frames dropped"));
            }
            audio_overflow_ = true;
            return;
        }
        audio_.insert(audio_.end(), pcm->begin(), pcm->end());
    } else if (type == msg::ptt_end) {
        if (!ptt_open_) {
            out.push_back(error_message(code::ptt_closed, "push-to-talk is not open"));
            return;
        }
        ptt_open_ = false;
        out.push_back({std::string(msg::ptt_ack), {{"mic", "closed"}}});
        std::string caption;
        if (e.payload.contains("caption") && e.payload["caption"].is_string()) {
            caption = e.payload["caption"].get<std::string>();
        }
        UserInput input;
        input.audio = std::move(audio_);
        audio_.clear();
        input.text = gateway_.config_.transcriber(input.audio, caption);
        run_user_turn(std::move(input), out);
    } else if (type == msg::text_turn) {
        if (ptt_open_) {
            out.push_back(error_message(code::ptt_open, "close push-to-talk before sending text"));
            return;
        }
        if (!e.payload.contains("text") || !e.payload["text"].is_string()) {
            out.push_back(error_message(code::bad_payload, "text.turn needs text"));
            return;
        }
        run_user_turn(UserInput{e.payload["text"].get<std::string>(), {}}, out);
    } else if (type == msg::video_complete) {
        const auto pending = engine.pending_video();
        if (!pending) {
            out.push_back(error_message(code::no_video, "no video request is pending"));
            return;
        }
        const std::string id = e.payload.value("video_id", "");
        auto it = uploads_.find(*pending);
        if (it == uploads_.end() || it->second.video_id != id) {
            out.push_back(error_message(code::no_video, "video '" + id + "' has not been uploaded"));
            return;
        }
        conversation_->video_registered(it->second, out);
    } else if (type == msg::video_skip) {
        const auto pending = engine.pending_video();
        if (!pending) {
            out.push_back(error_message(code::no_video, "no video request is pending"));
            return;
        }
        conversation_->video_skipped(*pending, out);
    } else if (type == msg::session_end) {
        if (!conversation_->ended()) conversation_->abort("client ended the session", out);
    }
}

void Connection::start_session(const ordered_json& payload, Outbox& out) {
    if (payload.value("proto", "") != kProtocolVersion) {
        out.push_back(error_message(code::proto_mismatch, "expected proto voice/1"));
        return;
    }
    const std::string mode = payload.value("mode", "text");
    if (mode != "text" && mode != "voice") {
        out.push_back(error_message(code::bad_payload, "mode must be voice or text"));
        return;
    }
    const GatewayConfig& cfg = gateway_.config_;
    const std::string id = gateway_.next_session_id();
    std::unique_ptr<Backend> backend;
    try {
        backend = cfg.backend_factory(id);
    } catch (const std::exception& ex) {
        out.push_back(error_message(code::backend_error, ex.what()));
        return;
    }
    EngineConfig ec;
    ec.agents = cfg.agents;
    ec.clock = cfg.clock;
    ec.analyzer = cfg.analyzer;
    ec.session_id = id;
    session_id_ = id;
    voice_mode_ = mode == "voice";
    conversation_ = std::make_unique<Conversation>(std::make_unique<Engine>(std::move(ec)), std::move(backend),
                                                   voice_mode_);
    gateway_.register_session(id, shared_from_this());
    out.push_back({std::string(msg::session_accepted),
                   {{"session_id", id}, {"mode", mode}, {"proto", kProtocolVersion}}});
    try {
        conversation_->start(out);
    } catch (const std::exception& ex) {
        out.push_back(error_message(code::backend_error, ex.what()));
    }
}

void Connection::run_user_turn(UserInput input, Outbox& out) {
    try {
        conversation_->user_turn(input, out);
    } catch (const StateViolation& ex) {
        const auto c = conversation_->ended() ? code::session_ended : code::video_pending;
        out.push_back(error_message(c, ex.what()));
    }
}

std::optional<std::string> Connection::persist(const Outbox& out) {
    std::optional<std::string> report;
    for (const ServerMessage& m : out) {
        if (m.type == msg::report_final) report = m.payload["report_json"].get<std::string>();
    }
    if (!conversation_) return report;
    const Engine& engine = conversation_->engine();
    if (SessionStore* store = gateway_.store()) {
        try {
            store->save_state(session_id_, engine.snapshot());
            const auto& turns = engine.transcript();
            store->append_turns(session_id_, assessment::Transcript(
                                                 turns.begin() + static_cast<std::ptrdiff_t>(persisted_turns_),
                                                 turns.end()));
            persisted_turns_ = turns.size();
            if (report) store->write_report(session_id_, *report);
        } catch (const std::exception& ex) {
            spdlog::error("session {}: persistence failed: {}", session_id_, ex.what());
        }
    }
    if (report) gateway_.remember_report(session_id_, *report);
    return report;
}

void Connection::flush(Outbox& out) {
    const std::optional<std::string> report = persist(out);
    for (ServerMessage& m : out) {
        Envelope env{std::move(m.type), session_id_, ++out_seq_, std::move(m.payload)};
        sink_->send(env.serialize());
    }
    out.clear();
    if (report && !closed_) {
        closed_ = true;
        sink_->close();
        gateway_.unregister_session(session_id_);
    }
}

void Connection::terminate(std::string_view reason, Outbox& out) {
    if (closed_) return;
    if (conversation_ && !conversation_->ended()) conversation_->abort(reason, out);
    flush(out);
    if (!closed_) {
        closed_ = true;
        sink_->close();
        if (!session_id_.empty()) gateway_.unregister_session(session_id_);
    }
}

void Connection::on_close() {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    Outbox out;
    if (conversation_ && !conversation_->ended()) conversation_->abort("connection closed", out);
    // The peer is gone: persist, but do not try to deliver.
    closed_ = true;
    persist(out);
    if (!session_id_.empty()) gateway_.unregister_session(session_id_);
}

bool Connection::idle_since(std::int64_t now_s, std::int64_t timeout_s) const {
    return now_s - last_activity_s_ >= timeout_s;
}

std::string Connection::upload(VideoComponent component, std::string_view bytes, std::optional<double> duration_s) {
    std::lock_guard lock(mutex_);
    if (closed_ || !conversation_ || conversation_->ended()) {
        throw UploadError(409, "CONFLICT", "session is not running");
    }
    const auto pending = conversation_->engine().pending_video();
    if (pending != component) {
        throw UploadError(409, "CONFLICT", "no pending " + enum_string(component) + " video request");
    }
    last_activity_s_ = gateway_.config_.clock->now_s();
    VideoRef ref;
    ref.component = component;
    ref.video_id = "v-" + session_id_ + "-" + enum_string(component);
    ref.duration_s = duration_s.value_or(0.0);
    ref.uri = "/sessions/" + session_id_ + "/videos/" + enum_string(component);
    if (SessionStore* store = gateway_.store()) store->save_video(session_id_, ref, bytes);
    uploads_[component] = ref;
    return ref.video_id;
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(GatewayConfig config) : config_(std::move(config)) {
    if (!config_.agents) config_.agents = std::make_shared<AgentTable>(AgentTable::defaults());
    config_.agents->validate();
    if (!config_.clock) config_.clock = std::make_shared<SystemClock>();
    if (!config_.backend_factory) throw ConfigError("gateway needs a backend factory");
    if (!config_.transcriber) config_.transcriber = caption_transcriber;
    if (config_.data_dir) {
        store_.emplace(*config_.data_dir);
        for (const auto& id : store_->recover()) spdlog::info("recovered session {} as aborted", id);
    }
}

std::shared_ptr<Connection> Gateway::connect(std::shared_ptr<Sink> sink) {
    return std::make_shared<Connection>(*this, std::move(sink));
}

std::string Gateway::next_session_id() {
    std::lock_guard lock(mutex_);
    ++counter_;
    std::string n = std::to_string(counter_);
    if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
    return config_.session_prefix + "-" + n;
}

void Gateway::register_session(const std::string& id, std::shared_ptr<Connection> connection) {
    std::lock_guard lock(mutex_);
    live_[id] = std::move(connection);
}

void Gateway::unregister_session(const std::string& id) {
    std::lock_guard lock(mutex_);
    live_.erase(id);
}

void Gateway::remember_report(const std::string& id, const std::string& json) {
    std::lock_guard lock(mutex_);
    reports_[id] = json;
}

std::vector<std::shared_ptr<Connection>> Gateway::live_connections() const {
    std::lock_guard lock(mutex_);
    std::vector<std::shared_ptr<Connection>> out;
    for (const auto& [id, c] : live_) out.push_back(c);
    return out;
}

std::size_t Gateway::live_sessions() const {
    std::lock_guard lock(mutex_);
    return live_.size();
}

std::string Gateway::upload_video(const std::string& session_id, std::string_view component, std::string_view bytes,
                                  std::string_view content_type, std::optional<double> duration_s) {
    std::shared_ptr<Connection> connection;
    {
        std::lock_guard lock(mutex_);
        auto it = live_.find(session_id);
        if (it == live_.end()) {
            if (reports_.count(session_id)) throw UploadError(409, "CONFLICT", "session has ended");
            throw UploadError(404, "NOT_FOUND", "unknown session '" + session_id + "'");
        }
        connection = it->second;
    }
    const auto c = enum_parse<VideoComponent>(component);
    if (!c) throw UploadError(400, "BAD_COMPONENT", "component must be facial or arm");
    const std::string_view media = content_type.substr(0, content_type.find(';'));
    if (media != "video/webm" && media != "video/mp4") {
        throw UploadError(415, "BAD_TYPE", "content type must be video/webm or video/mp4");
    }
    if (bytes.size() > kMaxVideoBytes) {
        throw UploadError(413, "TOO_LARGE", "video exceeds 50 MB");
    }
    if (duration_s && (*duration_s < 0 || *duration_s > kMaxVideoSeconds)) {
        throw UploadError(413, "TOO_LONG", "video exceeds 60 s");
    }
    return connection->upload(*c, bytes, duration_s);
}

std::string Gateway::load_report(const std::string& session_id) const {
    {
        std::lock_guard lock(mutex_);
        auto it = reports_.find(session_id);
        if (it != reports_.end()) return it->second;
    }
    if (store_) return store_->load_report(session_id);
    throw NotFound("no report for session '" + session_id + "'");
}

std::optional<std::string> Gateway::load_video(const std::string& session_id, std::string_view component) const {
    const auto c = enum_parse<VideoComponent>(component);
    if (!c || !store_) return std::nullopt;
    return store_->load_video(session_id, *c);
}

std::size_t Gateway::reap_idle() {
    const std::int64_t now = config_.clock->now_s();
    std::size_t reaped = 0;
    for (const auto& c : live_connections()) {
        std::lock_guard lock(c->mutex_);
        if (c->closed_ || !c->idle_since(now, config_.inactivity_timeout_s)) continue;
        Outbox out;
        out.push_back(error_message(code::inactive, "session idle for too long"));
        c->terminate("inactivity timeout", out);
        ++reaped;
    }
    return reaped;
}

void Gateway::shutdown() {
    for (const auto& c : live_connections()) {
        std::lock_guard lock(c->mutex_);
        if (c->closed_) continue;
        Outbox out;
        out.push_back(error_message(code::shutdown, "server shutting down"));
        c->terminate("server shutdown", out);
    }
}

}  // namespace voice::gateway
