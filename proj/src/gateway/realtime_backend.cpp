#include "voice/gateway/realtime_backend.hpp"

#include "voice/gateway/base64.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/ssl.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/ssl.hpp>
#include <boost/beast/websocket.hpp>
#include <boost/beast/websocket/ssl.hpp>

#include <regex>

namespace voice::gateway {

using namespace voice::agents;
using nlohmann::ordered_json;

ordered_json tool_schema(ToolKind kind) {
    ordered_json params{{"type", "object"}, {"properties", ordered_json::object()}, {"required", ordered_json::array()}};
    std::string description;
    switch (kind) {
        case ToolKind::update_assessment_state:
            description = "Record one assessment field.";
            params["properties"] = {{"field", {{"type", "string"}, {"enum", updatable_fields()}}},
                                    {"value", ordered_json::object()}};
            params["required"] = {"field", "value"};
            break;
        case ToolKind::start_video_recording:
            description = "Ask the user to record a video of the exam.";
            params["properties"] = {{"component", {{"type", "string"}, {"enum", {"facial", "arm"}}}}};
            params["required"] = {"component"};
            break;
        case ToolKind::transfer_agent: {
            description = "Hand the conversation to another agent.";
            ordered_json names = ordered_json::array();
            for (AgentId a : kAgentIds) names.push_back(enum_name(a));
            params["properties"] = {{"target", {{"type", "string"}, {"enum", names}}}};
            params["required"] = {"target"};
            break;
        }
        case ToolKind::run_final_analysis:
            description = "Run the final consistency check and scoring.";
            break;
        case ToolKind::disconnect:
            description = "End the session.";
            break;
    }
    return {{"type", "function"}, {"name", enum_name(kind)}, {"description", description}, {"parameters", params}};
}

ordered_json session_update_event(const InstructionBundle& bundle) {
    std::string instructions = bundle.instructions;
    if (!bundle.clarifications.empty()) {
        instructions += "\nClarify these fields with the user:";
        for (const auto& f : bundle.clarifications) instructions += " " + f;
    }
    ordered_json tools = ordered_json::array();
    for (ToolKind t : bundle.tools) tools.push_back(tool_schema(t));
    return {{"type", "session.update"},
            {"session",
             {{"modalities", {"text", "audio"}},
              {"instructions", instructions},
              {"input_audio_format", "pcm16"},
              {"output_audio_format", "pcm16"},
              {"input_audio_transcription", {{"model", "whisper-1"}}},
              {"turn_detection", nullptr},
              {"tools", tools},
              {"tool_choice", "auto"}}}};
}

std::vector<ordered_json> user_input_events(const UserInput& input) {
    std::vector<ordered_json> events;
    if (!input.audio.empty()) {
        for (std::size_t at = 0; at < input.audio.size(); at += 4096) {
            const std::size_t n = std::min<std::size_t>(4096, input.audio.size() - at);
            std::vector<std::int16_t> chunk(input.audio.begin() + static_cast<std::ptrdiff_t>(at),
                                            input.audio.begin() + static_cast<std::ptrdiff_t>(at + n));
            events.push_back({{"type", "input_audio_buffer.append"}, {"audio", encode_pcm16(chunk)}});
        }
        events.push_back({{"type", "input_audio_buffer.commit"}});
    } else {
        events.push_back({{"type", "conversation.item.create"},
                          {"item",
                           {{"type", "message"},
                            {"role", "user"},
                            {"content", {{{"type", "input_text"}, {"text", input.text}}}}}}});
    }
    events.push_back({{"type", "response.create"}});
    return events;
}

ordered_json function_output_event(const std::string& call_id, const ToolResult& result) {
    return {{"type", "conversation.item.create"},
            {"item", {{"type", "function_call_output"}, {"call_id", call_id}, {"output", result.to_json().dump()}}}};
}

MappedEvent map_server_event(const ordered_json& event) {
    MappedEvent m;
    const std::string type = event.value("type", "");
    if (type == "error") {
        throw std::runtime_error("realtime error: " + event.value("error", ordered_json::object()).dump());
    }
    if (type == "response.done") {
        m.response_done = true;
    } else if (type == "response.audio.delta") {
        if (auto pcm = decode_pcm16(event.value("delta", ""))) m.event = AssistantAudio{std::move(*pcm)};
    } else if (type == "response.audio_transcript.done" || type == "response.text.done") {
        const std::string text = event.value(type == "response.text.done" ? "text" : "transcript", "");
        if (!text.empty()) m.event = AssistantText{text};
    } else if (type == "conversation.item.input_audio_transcription.completed") {
        m.event = UserTranscript{event.value("transcript", "")};
    } else if (type == "response.function_call_arguments.done") {
        const std::string name = event.value("name", "");
        const auto kind = enum_parse<ToolKind>(name);
        if (!kind) throw std::runtime_error("realtime model called unknown tool '" + name + "'");
        ordered_json args = ordered_json::object();
        try {
            args = ordered_json::parse(event.value("arguments", "{}"));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("malformed tool arguments: ") + e.what());
        }
        m.event = ToolCall{*kind, args};
        m.call_id = event.value("call_id", "");
    }
    return m;
}

RealtimeBackend::RealtimeBackend(std::unique_ptr<RealtimeTransport> transport) : transport_(std::move(transport)) {}

BackendEvents RealtimeBackend::collect_response() {
    BackendEvents out;
    for (;;) {
        MappedEvent m = map_server_event(transport_->receive());
        if (m.event) {
            if (const auto* call = std::get_if<ToolCall>(&*m.event)) outstanding_.emplace_back(*call, m.call_id);
            out.push_back(std::move(*m.event));
        }
        if (m.response_done) return out;
    }
}

BackendEvents RealtimeBackend::begin(const InstructionBundle& bundle) {
    transport_->send(session_update_event(bundle));
    transport_->send({{"type", "response.create"}});
    return collect_response();
}

BackendEvents RealtimeBackend::set_instructions(const InstructionBundle& bundle) {
    transport_->send(session_update_event(bundle));
    if (!outstanding_.empty()) return {};
    transport_->send({{"type", "response.create"}});
    return collect_response();
}

BackendEvents RealtimeBackend::user_turn(const UserInput& input) {
    for (const auto& e : user_input_events(input)) transport_->send(e);
    return collect_response();
}

BackendEvents RealtimeBackend::tool_result(const ToolCall& call, const ToolResult& result) {
    auto it = std::find_if(outstanding_.begin(), outstanding_.end(), [&](const auto& p) { return p.first == call; });
    if (it == outstanding_.end()) return {};
    transport_->send(function_output_event(it->second, result));
    outstanding_.erase(it);
    if (!outstanding_.empty()) return {};
    // A handoff is followed by set_instructions, which starts the next response.
    const bool handoff = (call.kind == ToolKind::transfer_agent && result.ok) || call.kind == ToolKind::run_final_analysis;
    if (handoff) return {};
    transport_->send({{"type", "response.create"}});
    return collect_response();
}

void RealtimeBackend::close() {
    transport_->close();
}

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace ssl = asio::ssl;
using tcp = asio::ip::tcp;

class BeastTransport final : public RealtimeTransport {
public:
    explicit BeastTransport(const RealtimeEndpoint& endpoint) : ssl_ctx_(ssl::context::tls_client), ws_(ioc_, ssl_ctx_) {
        static const std::regex url(R"(^wss://([^/:]+)(?::(\d+))?(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(endpoint.url, m, url)) {
            throw std::runtime_error("VOICE_REALTIME_ENDPOINT must be a wss:// URL");
        }
        const std::string host = m[1];
        const std::string port = m[2].matched ? m[2].str() : "443";
        const std::string target = m[3].matched ? m[3].str() : "/";

        ssl_ctx_.set_default_verify_paths();
        ssl_ctx_.set_verify_mode(ssl::verify_peer);
        tcp::resolver resolver(ioc_);
        auto results = resolver.resolve(host, port);
        beast::get_lowest_layer(ws_).connect(results);
        if (!SSL_set_tlsext_host_name(ws_.next_layer().native_handle(), host.c_str())) {
            throw std::runtime_error("cannot set TLS SNI host");
        }
        ws_.next_layer().handshake(ssl::stream_base::client);
        const std::string key = endpoint.api_key;
        ws_.set_option(websocket::stream_base::decorator([key](websocket::request_type& req) {
            req.set(beast::http::field::authorization, "Bearer " + key);
            req.set("api-key", key);
            req.set("OpenAI-Beta", "realtime=v1");
        }));
        ws_.handshake(host, target);
    }

    void send(const ordered_json& event) override {
        ws_.text(true);
        ws_.write(asio::buffer(event.dump()));
    }

    ordered_json receive() override {
        beast::flat_buffer buffer;
        ws_.read(buffer);
        return ordered_json::parse(beast::buffers_to_string(buffer.data()));
    }

    void close() override {
        beast::error_code ec;
        ws_.close(websocket::close_code::normal, ec);
    }

private:
    asio::io_context ioc_;
    ssl::context ssl_ctx_;
    websocket::stream<beast::ssl_stream<beast::tcp_stream>> ws_;
};

}  // namespace

std::unique_ptr<RealtimeTransport> connect_realtime(const RealtimeEndpoint& endpoint) {
    return std::make_unique<BeastTransport>(endpoint);
}

}  // namespace voice::gateway
