#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace voice::gateway {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kProtocolVersion = "voice/1";

// Audio: PCM16 mono at 24 kHz, base64 in JSON frames.
inline constexpr int kSampleRate = 24000;
inline constexpr std::size_t kMaxFrameSamples = 4096;
inline constexpr std::size_t kMaxTurnSamples = 120 * kSampleRate;
inline constexpr std::size_t kMaxMessageBytes = 64 * 1024;
inline constexpr std::int64_t kInactivityTimeoutS = 5 * 60;

// Video uploads.
inline constexpr std::size_t kMaxVideoBytes = 50ull * 1024 * 1024;
inline constexpr double kMaxVideoSeconds = 60.0;

namespace msg {
// client -> server
inline constexpr std::string_view session_start = "session.start";
inline constexpr std::string_view ptt_begin = "ptt.begin";
inline constexpr std::string_view audio_frame = "audio.frame";
inline constexpr std::string_view ptt_end = "ptt.end";
inline constexpr std::string_view text_turn = "text.turn";
inline constexpr std::string_view video_complete = "video.complete";
inline constexpr std::string_view video_skip = "video.skip";
inline constexpr std::string_view session_end = "session.end";
// server -> client
inline constexpr std::string_view session_accepted = "session.accepted";
inline constexpr std::string_view ptt_ack = "ptt.ack";
inline constexpr std::string_view transcript_user = "transcript.user";
inline constexpr std::string_view assistant_text = "assistant.text";
inline constexpr std::string_view assistant_audio_frame = "assistant.audio.frame";
inline constexpr std::string_view video_request = "video.request";
inline constexpr std::string_view state_phase = "state.phase";
inline constexpr std::string_view report_final = "report.final";
inline constexpr std::string_view error = "error";
}  // namespace msg

namespace code {
inline constexpr std::string_view ptt_closed = "PTT_CLOSED";
inline constexpr std::string_view ptt_open = "PTT_OPEN";
inline constexpr std::string_view bad_seq = "BAD_SEQ";
inline constexpr std::string_view frame_too_large = "FRAME_TOO_LARGE";
inline constexpr std::string_view unknown_type = "UNKNOWN_TYPE";
inline constexpr std::string_view audio_limit = "AUDIO_LIMIT";
inline constexpr std::string_view bad_json = "BAD_JSON";
inline constexpr std::string_view bad_envelope = "BAD_ENVELOPE";
inline constexpr std::string_view bad_payload = "BAD_PAYLOAD";
inline constexpr std::string_view bad_frame = "BAD_FRAME";
inline constexpr std::string_view no_session = "NO_SESSION";
inline constexpr std::string_view already_started = "ALREADY_STARTED";
inline constexpr std::string_view proto_mismatch = "PROTO_MISMATCH";
inline constexpr std::string_view video_pending = "VIDEO_PENDING";
inline constexpr std::string_view no_video = "NO_VIDEO";
inline constexpr std::string_view session_ended = "SESSION_ENDED";
inline constexpr std::string_view backend_error = "BACKEND_ERROR";
inline constexpr std::string_view inactive = "INACTIVE";
inline constexpr std::string_view shutdown = "SHUTDOWN";
}  // namespace code

/// Raised while decoding a client envelope; `code` goes into the error reply.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(std::string_view code, const std::string& detail)
        : std::runtime_error(detail), code_(code) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct Envelope {
    std::string type;
    std::string session_id;
    std::int64_t seq = 0;
    ordered_json payload = ordered_json::object();

    std::string serialize() const;
    /// Throws ProtocolError (BAD_JSON, BAD_ENVELOPE, FRAME_TOO_LARGE).
    /// `max_bytes` guards client input; readers of server output may lift it.
    static Envelope parse(std::string_view text, std::size_t max_bytes = kMaxMessageBytes);
};

bool is_client_type(std::string_view type);

}  // namespace voice::gateway
