#include "voice/gateway/protocol.hpp"

#include <array>

namespace voice::gateway {

std::string Envelope::serialize() const {
    ordered_json j{{"type", type}, {"session_id", session_id}, {"seq", seq}, {"payload", payload}};
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

Envelope Envelope::parse(std::string_view text, std::size_t max_bytes) {
    if (text.size() > max_bytes) {
        throw ProtocolError(code::frame_too_large,
                            "message of " + std::to_string(text.size()) + " bytes exceeds " +
                                std::to_string(max_bytes));
    }
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(code::bad_json, e.what());
    }
    if (!j.is_object()) throw ProtocolError(code::bad_envelope, "envelope must be an object");
    if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError(code::bad_envelope, "missing 'type'");
    if (!j.contains("seq") || !j["seq"].is_number_integer()) {
        throw ProtocolError(code::bad_envelope, "missing integer 'seq'");
    }
    Envelope e;
    e.type = j["type"].get<std::string>();
    e.seq = j["seq"].get<std::int64_t>();
    if (j.contains("session_id") && j["session_id"].is_string()) e.session_id = j["session_id"].get<std::string>();
    if (j.contains("payload")) {
        if (!j["payload"].is_object()) throw ProtocolError(code::bad_envelope, "'payload' must be an object");
        e.payload = j["payload"];
    }
    return e;
}

bool is_client_type(std::string_view type) {
    static constexpr std::array types{msg::session_start, msg::ptt_begin,      msg::audio_frame,
                                      msg::ptt_end,       msg::text_turn,      msg::video_complete,
                                      msg::video_skip,    msg::session_end};
    for (auto t : types) {
        if (t == type) return true;
    }
    return false;
}

}  // namespace voice::gateway
