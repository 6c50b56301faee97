#pragma once

#include "voice/agents/backend.hpp"
#include "voice/gateway/conversation.hpp"
#include "voice/gateway/session_store.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace voice::gateway {

/// Outbound side of one client connection. Implementations must not block.
class Sink {
public:
    virtual ~Sink() = default;
    virtual void send(std::string text) = 0;
    virtual void close() = 0;
};

using BackendFactory = std::function<std::unique_ptr<agents::Backend>(const std::string& session_id)>;
/// Turns a committed push-to-talk buffer into text. `caption` is the
/// optional caption carried by ptt.end.
using Transcriber = std::function<std::string(const std::vector<std::int16_t>& audio, const std::string& caption)>;

/// Offline transcriber: the ptt.end caption is the transcription and
/// uncaptioned audio transcribes to empty text.
std::string caption_transcriber(const std::vector<std::int16_t>& audio, const std::string& caption);

struct GatewayConfig {
    std::shared_ptr<const agents::AgentTable> agents;
    std::shared_ptr<const agents::Clock> clock;
    std::shared_ptr<const agents::Analyzer> analyzer;
    BackendFactory backend_factory;
    Transcriber transcriber = caption_transcriber;
    std::optional<std::filesystem::path> data_dir;  // in-memory reports only when empty
    std::string session_prefix = "s";
    std::int64_t inactivity_timeout_s = kInactivityTimeoutS;
};

/// Rejected video upload. `status` is the HTTP status to answer with.
class UploadError : public std::runtime_error {
public:
    UploadError(int status, std::string_view code, const std::string& detail)
        : std::runtime_error(detail), status_(status), code_(code) {}
    int status() const { return status_; }
    const std::string& code() const { return code_; }

private:
    int status_;
    std::string code_;
};

class Gateway;

/// One client connection carrying at most one session. Messages from the
/// connection, uploads for its session and timer events are serialized by a
/// per-connection mutex.
class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(Gateway& gateway, std::shared_ptr<Sink> sink);

    void on_message(std::string_view text);
    /// The peer went away. A running session is aborted and its report
    /// persisted.
    void on_close();

    bool closed() const;
    std::string session_id() const;

private:
    friend class Gateway;

    void handle(const Envelope& envelope, Outbox& out);
    void start_session(const ordered_json& payload, Outbox& out);
    void run_user_turn(agents::UserInput input, Outbox& out);
    std::optional<std::string> persist(const Outbox& out);
    void flush(Outbox& out);
    void terminate(std::string_view reason, Outbox& out);
    bool idle_since(std::int64_t now_s, std::int64_t timeout_s) const;
    std::string upload(assessment::VideoComponent component, std::string_view bytes, std::optional<double> duration_s);

    Gateway& gateway_;
    std::shared_ptr<Sink> sink_;
    mutable std::mutex mutex_;

    bool closed_ = false;
    bool voice_mode_ = false;
    std::string session_id_;
    std::unique_ptr<Conversation> conversation_;
    std::optional<std::int64_t> last_in_seq_;
    std::int64_t out_seq_ = 0;
    std::int64_t last_activity_s_ = 0;
    bool ptt_open_ = false;
    bool audio_overflow_ = false;
    std::vector<std::int16_t> audio_;
    std::map<assessment::VideoComponent, assessment::VideoRef> uploads_;
    std::size_t persisted_turns_ = 0;
};

class Gateway {
public:
    explicit Gateway(GatewayConfig config);

    std::shared_ptr<Connection> connect(std::shared_ptr<Sink> sink);

    /// Stores an uploaded video for the session's pending request and returns
    /// its id. Throws UploadError (404, 400, 409, 413, 415).
    std::string upload_video(const std::string& session_id, std::string_view component, std::string_view bytes,
                             std::string_view content_type, std::optional<double> duration_s = std::nullopt);

    /// The report exactly as sent in report.final. Throws NotFound.
    std::string load_report(const std::string& session_id) const;
    std::optional<std::string> load_video(const std::string& session_id, std::string_view component) const;

    /// Aborts sessions idle for longer than the inactivity timeout.
    std::size_t reap_idle();
    /// Aborts every live session, delivering abort reports.
    void shutdown();

    std::size_t live_sessions() const;
    SessionStore* store() { return store_ ? &*store_ : nullptr; }
    const GatewayConfig& config() const { return config_; }

private:
    friend class Connection;

    std::string next_session_id();
    void register_session(const std::string& id, std::shared_ptr<Connection> connection);
    void unregister_session(const std::string& id);
    void remember_report(const std::string& id, const std::string& json);
    std::vector<std::shared_ptr<Connection>> live_connections() const;

    GatewayConfig config_;
    std::optional<SessionStore> store_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Connection>> live_;
    std::map<std::string, std::string> reports_;
    std::uint64_t counter_ = 0;
};

}  // namespace voice::gateway
