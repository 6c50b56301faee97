#include "voice/agents/analyzer.hpp"
#include "voice/assessment/report.hpp"
#include "voice/gateway/base64.hpp"
#include "voice/gateway/config.hpp"
#include "voice/gateway/gateway.hpp"
#include "voice/gateway/protocol.hpp"
#include "voice/gateway/realtime_backend.hpp"
#include "voice/gateway/server.hpp"
#include "voice/scripted/scripted_backend.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include <deque>
#include <fstream>
#include <random>

#include <unistd.h>

using namespace voice;
using namespace voice::gateway;
namespace fs = std::filesystem;

namespace {

const fs::path kSourceDir = VOICE_SOURCE_DIR;

// The first three caller answers of the reference call (scripts/table1.json).
constexpr const char* kLine1 = "The patient is 72 years old and male.";
constexpr const char* kLine2 =
    "The patient was normal around 9 p.m. yesterday and then this morning during a video call I noticed that his "
    "face was drooping.";
constexpr const char* kLine3 = "around 9 a.m.";

class RecordingSink final : public Sink {
public:
    void send(std::string text) override {
        std::lock_guard lock(mutex);
        messages.push_back(std::move(text));
    }
    void close() override { closed = true; }

    std::vector<Envelope> envelopes() {
        std::lock_guard lock(mutex);
        std::vector<Envelope> out;
        for (const auto& m : messages) out.push_back(Envelope::parse(m, std::numeric_limits<std::size_t>::max()));
        return out;
    }
    std::vector<std::string> errors() {
        std::vector<std::string> codes;
        for (const auto& e : envelopes()) {
            if (e.type == msg::error) codes.push_back(e.payload.value("code", ""));
        }
        return codes;
    }
    std::optional<Envelope> last(std::string_view type) {
        std::optional<Envelope> found;
        for (auto& e : envelopes()) {
            if (e.type == type) found = e;
        }
        return found;
    }

    std::mutex mutex;
    std::vector<std::string> messages;
    std::atomic<bool> closed = false;
};

class TempDir {
public:
    TempDir() {
        static int n = 0;
        path_ = fs::temp_directory_path() / ("voice-gw-" + std::to_string(::getpid()) + "-" + std::to_string(++n));
        fs::remove_all(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

struct Fixture {
    std::shared_ptr<agents::ManualClock> clock = std::make_shared<agents::ManualClock>(1741939200);
    std::unique_ptr<Gateway> gw;

    explicit Fixture(std::optional<fs::path> data_dir = std::nullopt) {
        auto table = std::make_shared<const agents::AgentTable>(agents::AgentTable::defaults());
        auto script = scripted::load_script(kSourceDir / "scripts/table1.json", *table);
        GatewayConfig c;
        c.agents = table;
        c.clock = clock;
        c.analyzer = std::make_shared<agents::DeterministicAnalyzer>();
        c.backend_factory = [script](const std::string&) { return std::make_unique<scripted::ScriptedBackend>(script); };
        c.data_dir = std::move(data_dir);
        gw = std::make_unique<Gateway>(std::move(c));
    }

    struct Client {
        std::shared_ptr<RecordingSink> sink = std::make_shared<RecordingSink>();
        std::shared_ptr<Connection> conn;
        std::int64_t seq = 0;

        void send(std::string_view type, ordered_json payload = ordered_json::object()) {
            conn->on_message(Envelope{std::string(type), conn->session_id(), ++seq, std::move(payload)}.serialize());
        }
    };

    Client connect(bool start = true, std::string mode = "text") {
        Client c;
        c.conn = gw->connect(c.sink);
        if (start) c.send(msg::session_start, {{"proto", "voice/1"}, {"mode", mode}});
        return c;
    }
};

}  // namespace

TEST(Base64, Rfc4648Vectors) {
    const std::vector<std::pair<std::string, std::string>> vectors{
        {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="},
        {"foobar", "Zm9vYmFy"}};
    for (const auto& [plain, encoded] : vectors) {
        EXPECT_EQ(base64_encode(plain), encoded);
        EXPECT_EQ(base64_decode(encoded), plain);
    }
}

TEST(Base64, StrictDecoding) {
    for (const char* bad : {"Zg=", "Zm9v!", "Zg==Zg==", "Z", "Zm9vYmFy\n"}) {
        EXPECT_FALSE(base64_decode(bad).has_value()) << bad;
    }
    EXPECT_FALSE(decode_pcm16(base64_encode("abc")).has_value()) << "odd byte count";
}

TEST(Base64Property, Pcm16RoundTrips) {
    std::mt19937 rng(1);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::int16_t> pcm(rng() % 600);
        for (auto& s : pcm) s = static_cast<std::int16_t>(rng());
        ASSERT_EQ(decode_pcm16(encode_pcm16(pcm)), pcm);
    }
}

TEST(Protocol, ParsesAndRejectsEnvelopes) {
    const Envelope e = Envelope::parse(R"({"type":"text.turn","seq":3,"payload":{"text":"hi"}})");
    EXPECT_EQ(e.type, "text.turn");
    EXPECT_EQ(e.seq, 3);
    EXPECT_EQ(e.payload["text"], "hi");
    EXPECT_EQ(Envelope::parse(e.serialize()).serialize(), e.serialize());

    auto code_of = [](std::string_view text) {
        try {
            Envelope::parse(text);
        } catch (const ProtocolError& err) {
            return err.code();
        }
        return std::string("ok");
    };
    EXPECT_EQ(code_of("{nope"), code::bad_json);
    EXPECT_EQ(code_of("[1]"), code::bad_envelope);
    EXPECT_EQ(code_of(R"({"seq":1})"), code::bad_envelope);
    EXPECT_EQ(code_of(R"({"type":"x","seq":"1"})"), code::bad_envelope);
    EXPECT_EQ(code_of(R"({"type":"x","seq":1,"payload":[]})"), code::bad_envelope);
    EXPECT_EQ(code_of(std::string(kMaxMessageBytes + 1, ' ')), code::frame_too_large);
    EXPECT_TRUE(is_client_type("ptt.begin"));
    EXPECT_FALSE(is_client_type("report.final"));
}

TEST(Gateway, StartsSessionAndGreets) {
    Fixture f;
    auto c = f.connect();
    const auto accepted = c.sink->last(msg::session_accepted);
    ASSERT_TRUE(accepted);
    EXPECT_EQ(accepted->payload["session_id"], "s-0001");
    EXPECT_TRUE(c.sink->last(msg::assistant_text));
    EXPECT_EQ(f.gw->live_sessions(), 1u);
}

TEST(Gateway, ReportsClientErrors) {
    Fixture f;
    auto c = f.connect(false);
    c.send(msg::text_turn, {{"text", "hi"}});
    c.send(msg::session_start, {{"proto", "voice/9"}});
    c.send("bogus.type");
    c.conn->on_message("{broken");
    c.send(msg::session_start, {{"proto", "voice/1"}, {"mode", "text"}});
    c.send(msg::session_start, {{"proto", "voice/1"}, {"mode", "text"}});
    c.send(msg::audio_frame, {{"pcm16_b64", encode_pcm16({1, 2})}});
    c.send(msg::ptt_end);
    c.send(msg::video_complete, {{"video_id", "v"}});
    c.send(msg::ptt_begin);
    c.send(msg::audio_frame, {{"pcm16_b64", encode_pcm16(std::vector<std::int16_t>(5000))}});
    c.send(msg::audio_frame, {{"pcm16_b64", "***"}});
    c.send(msg::audio_frame, {{"pcm16_b64", encode_pcm16({1, 2})}, {"samples", 3}});
    c.send(msg::ptt_begin);
    c.send(msg::text_turn, {{"text", "typing"}});
    const std::vector<std::string> want{
        std::string(code::no_session),       std::string(code::proto_mismatch), std::string(code::unknown_type),
        std::string(code::bad_json),         std::string(code::already_started), std::string(code::ptt_closed),
        std::string(code::ptt_closed),       std::string(code::no_video),       std::string(code::frame_too_large),
        std::string(code::bad_frame),        std::string(code::bad_frame),      std::string(code::ptt_open),
        std::string(code::ptt_open)};
    EXPECT_EQ(c.sink->errors(), want);
    EXPECT_FALSE(c.sink->closed);
}

TEST(Gateway, SequenceViolationEndsSessionWithReport) {
    Fixture f;
    auto c = f.connect();
    c.seq = 0;
    c.send(msg::text_turn, {{"text", "again"}});
    EXPECT_TRUE(c.sink->closed);
    EXPECT_EQ(c.sink->errors().back(), code::bad_seq);
    const auto report = c.sink->last(msg::report_final);
    ASSERT_TRUE(report);
    EXPECT_TRUE(assessment::parse_report(report->payload["report_json"].get<std::string>()).aborted);
    EXPECT_EQ(f.gw->live_sessions(), 0u);
}

TEST(Gateway, ServerSequenceIsConsecutive) {
    Fixture f;
    auto c = f.connect();
    c.send(msg::text_turn, {{"text", kLine1}});
    c.send(msg::session_end);
    std::int64_t expect = 1;
    for (const auto& e : c.sink->envelopes()) EXPECT_EQ(e.seq, expect++);
}

TEST(Gateway, VoiceTurnUsesCaption) {
    Fixture f;
    auto c = f.connect(true, "voice");
    c.send(msg::ptt_begin);
    c.send(msg::audio_frame, {{"pcm16_b64", encode_pcm16(std::vector<std::int16_t>(2400))}, {"samples", 2400}});
    c.send(msg::ptt_end, {{"caption", kLine1}});
    const auto heard = c.sink->last(msg::transcript_user);
    ASSERT_TRUE(heard);
    EXPECT_EQ(heard->payload["text"], kLine1);
    EXPECT_TRUE(c.sink->errors().empty());
}

TEST(Gateway, UploadValidation) {
    Fixture f;
    auto c = f.connect();
    const std::string id = c.conn->session_id();
    auto status_of = [&](const std::string& session, std::string_view component, std::string_view bytes,
                         std::string_view type, std::optional<double> secs) {
        try {
            f.gw->upload_video(session, component, bytes, type, secs);
        } catch (const UploadError& e) {
            return e.status();
        }
        return 200;
    };
    EXPECT_EQ(status_of("nope", "facial", "x", "video/webm", 1.0), 404);
    EXPECT_EQ(status_of(id, "leg", "x", "video/webm", 1.0), 400);
    EXPECT_EQ(status_of(id, "facial", "x", "image/png", 1.0), 415);
    EXPECT_EQ(status_of(id, "facial", "x", "video/webm", 61.0), 413);
    EXPECT_EQ(status_of(id, "facial", std::string(kMaxVideoBytes + 1, 'x'), "video/webm", 1.0), 413);
    EXPECT_EQ(status_of(id, "facial", "x", "video/webm", 1.0), 409) << "no pending request";
}

TEST(Gateway, VideoRoundTripAndPersistence) {
    TempDir dir;
    Fixture f(dir.path());
    auto c = f.connect();
    const std::string id = c.conn->session_id();
    c.send(msg::text_turn, {{"text", kLine1}});
    c.send(msg::text_turn, {{"text", kLine2}});
    c.send(msg::text_turn, {{"text", kLine3}});
    const auto request = c.sink->last(msg::video_request);
    ASSERT_TRUE(request) << c.sink->messages.back();
    EXPECT_EQ(request->payload["component"], "facial");
    const std::string vid = f.gw->upload_video(id, "facial", "\x1a\x45\xdf\xa3 bytes", "video/webm; codecs=vp9", 9.5);
    c.send(msg::video_complete, {{"video_id", vid}});
    EXPECT_EQ(f.gw->load_video(id, "facial"), "\x1a\x45\xdf\xa3 bytes");
    c.send(msg::session_end);

    const auto report = c.sink->last(msg::report_final);
    ASSERT_TRUE(report);
    const std::string streamed = report->payload["report_json"].get<std::string>();
    EXPECT_EQ(f.gw->load_report(id), streamed);
    SessionStore store(dir.path());
    EXPECT_EQ(store.load_report(id), streamed);
    const auto parsed = assessment::parse_report(streamed);
    ASSERT_EQ(parsed.assessment.videos.size(), 1u);
    EXPECT_EQ(parsed.assessment.videos[0].video_id, vid);
    EXPECT_EQ(store.load_transcript(id), parsed.transcript);
    EXPECT_EQ(store.load_videos(id).size(), 1u);
    EXPECT_THROW(f.gw->upload_video(id, "arm", "x", "video/webm"), UploadError) << "session has ended";
}

TEST(Gateway, RecoversInterruptedSessions) {
    TempDir dir;
    std::string id;
    {
        Fixture f(dir.path());
        auto c = f.connect();
        id = c.conn->session_id();
        c.send(msg::text_turn, {{"text", kLine1}});
        // Simulated crash: the gateway goes away without closing the session.
    }
    ASSERT_FALSE(SessionStore(dir.path()).has_report(id));
    Fixture restarted(dir.path());
    const auto report = assessment::parse_report(restarted.gw->load_report(id));
    EXPECT_TRUE(report.aborted);
    EXPECT_EQ(report.assessment.demographics.age, 72);
}

TEST(Gateway, ReapsIdleSessions) {
    Fixture f;
    auto idle = f.connect();
    f.clock->advance(kInactivityTimeoutS - 1);
    auto busy = f.connect();
    EXPECT_EQ(f.gw->reap_idle(), 0u);
    f.clock->advance(1);
    EXPECT_EQ(f.gw->reap_idle(), 1u);
    EXPECT_TRUE(idle.sink->closed);
    EXPECT_EQ(idle.sink->errors().back(), code::inactive);
    EXPECT_TRUE(idle.sink->last(msg::report_final));
    EXPECT_FALSE(busy.sink->closed);
}

TEST(Gateway, ShutdownAbortsLiveSessions) {
    Fixture f;
    auto a = f.connect();
    auto b = f.connect();
    f.gw->shutdown();
    EXPECT_EQ(f.gw->live_sessions(), 0u);
    for (auto* c : {&a, &b}) {
        EXPECT_TRUE(c->sink->closed);
        ASSERT_TRUE(c->sink->last(msg::report_final));
    }
}

TEST(Gateway, PeerDisconnectPersistsWithoutDelivery) {
    Fixture f;
    auto c = f.connect();
    const std::string id = c.conn->session_id();
    const auto before = c.sink->messages.size();
    c.conn->on_close();
    EXPECT_EQ(c.sink->messages.size(), before);
    EXPECT_TRUE(assessment::parse_report(f.gw->load_report(id)).aborted);
}

TEST(Config, ReadsEnvironment) {
    const std::map<std::string, std::string> env{{"VOICE_LISTEN_ADDR", "127.0.0.1:9000"},
                                                 {"VOICE_BACKEND", "realtime"},
                                                 {"VOICE_REALTIME_ENDPOINT", "wss://example.invalid/v1"},
                                                 {"VOICE_REALTIME_KEY", "sk-secret"}};
    const auto cfg = ServiceConfig::from_env([&](const char* k) -> const char* {
        auto it = env.find(k);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    EXPECT_EQ(cfg.listen_addr, "127.0.0.1:9000");
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.describe().find("sk-secret"), std::string::npos);
}

TEST(Config, RejectsIncompleteSettings) {
    ServiceConfig c;
    EXPECT_THROW(c.validate(), agents::ConfigError) << "scripted without a script";
    c.script_path = kSourceDir / "scripts/table1.json";
    EXPECT_NO_THROW(c.validate());
    c.backend = "realtime";
    EXPECT_THROW(c.validate(), agents::ConfigError);
    c.backend = "magic";
    EXPECT_THROW(c.validate(), agents::ConfigError);
    c.backend = "scripted";
    c.listen_addr = "host:99999";
    EXPECT_THROW(c.validate(), agents::ConfigError);
}

TEST(Config, ListenAddresses) {
    EXPECT_EQ(parse_listen_address("8080"), std::make_pair(std::string("0.0.0.0"), static_cast<unsigned short>(8080)));
    EXPECT_EQ(parse_listen_address("localhost:81"), std::make_pair(std::string("127.0.0.1"), static_cast<unsigned short>(81)));
    EXPECT_EQ(parse_listen_address("[::1]:82").first, "::1");
    EXPECT_THROW(parse_listen_address("host:abc"), std::invalid_argument);
}

TEST(Config, RealtimeBackendIsNotContactedUntilASessionStarts) {
    ServiceConfig c;
    c.backend = "realtime";
    c.realtime_endpoint = "wss://127.0.0.1:1/v1";
    c.realtime_key = "k";
    TempDir dir;
    c.data_dir = dir.path();
    GatewayConfig g;
    ASSERT_NO_THROW(g = make_gateway_config(c));
    Gateway gw(std::move(g));
    RecordingSink* raw = nullptr;
    auto sink = std::make_shared<RecordingSink>();
    raw = sink.get();
    auto conn = gw.connect(sink);
    conn->on_message(Envelope{"session.start", "", 1, {{"proto", "voice/1"}}}.serialize());
    EXPECT_EQ(raw->errors(), std::vector<std::string>{std::string(code::backend_error)});
}

// ---------------------------------------------------------------- realtime mapping

namespace {

class FakeTransport final : public RealtimeTransport {
public:
    explicit FakeTransport(std::deque<ordered_json> replies) : replies_(std::move(replies)) {}
    void send(const ordered_json& event) override { sent->push_back(event); }
    ordered_json receive() override {
        if (replies_.empty()) throw std::runtime_error("transport drained");
        auto e = replies_.front();
        replies_.pop_front();
        return e;
    }
    std::shared_ptr<std::vector<ordered_json>> sent = std::make_shared<std::vector<ordered_json>>();

private:
    std::deque<ordered_json> replies_;
};

}  // namespace

TEST(Realtime, ToolSchemasNameEveryTool) {
    for (auto kind : {agents::ToolKind::update_assessment_state, agents::ToolKind::start_video_recording,
                      agents::ToolKind::transfer_agent, agents::ToolKind::run_final_analysis,
                      agents::ToolKind::disconnect}) {
        const auto s = tool_schema(kind);
        EXPECT_EQ(s["type"], "function");
        EXPECT_EQ(s["name"], enum_name(kind));
        EXPECT_EQ(s["parameters"]["type"], "object");
    }
}

TEST(Realtime, SessionUpdateCarriesInstructionsAndTools) {
    agents::InstructionBundle b;
    b.agent = agents::AgentId::main;
    b.instructions = "Ask things.";
    b.tools = {agents::ToolKind::transfer_agent};
    b.clarifications = {"demographics.sex"};
    const auto e = session_update_event(b);
    EXPECT_EQ(e["type"], "session.update");
    EXPECT_NE(e["session"]["instructions"].get<std::string>().find("demographics.sex"), std::string::npos);
    ASSERT_EQ(e["session"]["tools"].size(), 1u);
    EXPECT_EQ(e["session"]["tools"][0]["name"], "transfer_agent");
}

TEST(Realtime, UserInputEvents) {
    const auto text = user_input_events({"hello", {}});
    ASSERT_EQ(text.size(), 2u);
    EXPECT_EQ(text[0]["type"], "conversation.item.create");
    EXPECT_EQ(text[1]["type"], "response.create");
    const auto audio = user_input_events({"", std::vector<std::int16_t>(5000)});
    ASSERT_EQ(audio.size(), 4u);
    EXPECT_EQ(audio[0]["type"], "input_audio_buffer.append");
    EXPECT_EQ(audio[2]["type"], "input_audio_buffer.commit");
}

TEST(Realtime, MapsServerEvents) {
    EXPECT_TRUE(map_server_event({{"type", "response.done"}}).response_done);
    const auto text = map_server_event({{"type", "response.audio_transcript.done"}, {"transcript", "Hi"}});
    ASSERT_TRUE(text.event);
    EXPECT_EQ(std::get<agents::AssistantText>(*text.event).text, "Hi");
    const auto heard = map_server_event({{"type", "conversation.item.input_audio_transcription.completed"}, {"transcript", "72"}});
    EXPECT_EQ(std::get<agents::UserTranscript>(*heard.event).text, "72");
    const auto call = map_server_event({{"type", "response.function_call_arguments.done"},
                                        {"name", "transfer_agent"},
                                        {"call_id", "c1"},
                                        {"arguments", R"({"target":"onset_lkw"})"}});
    EXPECT_EQ(call.call_id, "c1");
    EXPECT_EQ(std::get<agents::ToolCall>(*call.event), agents::ToolCall::transfer(agents::AgentId::onset_lkw));
    EXPECT_FALSE(map_server_event({{"type", "rate_limits.updated"}}).event);
    EXPECT_THROW(map_server_event({{"type", "error"}, {"error", {{"message", "x"}}}}), std::runtime_error);
    EXPECT_THROW(map_server_event({{"type", "response.function_call_arguments.done"}, {"name", "rm_rf"}}),
                 std::runtime_error);
}

TEST(Realtime, BackendAnswersToolCallsById) {
    auto transport = std::make_unique<FakeTransport>(std::deque<ordered_json>{
        {{"type", "response.text.done"}, {"text", "Hello"}},
        {{"type", "response.function_call_arguments.done"},
         {"name", "update_assessment_state"},
         {"call_id", "c7"},
         {"arguments", R"({"field":"demographics.age","value":70})"}},
        {{"type", "response.done"}},
        {{"type", "response.done"}},
    });
    auto sent = transport->sent;
    RealtimeBackend backend(std::move(transport));
    const auto events = backend.begin({});
    ASSERT_EQ(events.size(), 2u);
    const auto call = std::get<agents::ToolCall>(events[1]);
    EXPECT_TRUE(backend.tool_result(call, agents::ToolResult::success()).empty());
    ASSERT_GE(sent->size(), 3u);
    EXPECT_EQ((*sent)[2]["item"]["call_id"], "c7");
    EXPECT_EQ((*sent)[3]["type"], "response.create");
}

// ---------------------------------------------------------------- HTTP / WebSocket loopback

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

http::response<http::string_body> http_call(unsigned short port, http::verb verb, const std::string& target,
                                            std::string body = {}, std::string type = {}) {
    boost::asio::io_context ioc;
    beast::tcp_stream stream(ioc);
    stream.connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port));
    http::request<http::string_body> req{verb, target, 11};
    req.set(http::field::host, "127.0.0.1");
    if (!type.empty()) req.set(http::field::content_type, type);
    req.body() = std::move(body);
    req.prepare_payload();
    http::write(stream, req);
    beast::flat_buffer buffer;
    http::response<http::string_body> res;
    http::read(stream, buffer, res);
    return res;
}

}  // namespace

TEST(Server, ServesSessionUploadAndReport) {
    TempDir dir;
    Fixture f(dir.path());
    Server server(*f.gw, "127.0.0.1", 0);
    server.start();
    const unsigned short port = server.port();

    EXPECT_EQ(http_call(port, http::verb::get, "/healthz").result(), http::status::ok);
    EXPECT_EQ(http_call(port, http::verb::get, "/nowhere").result(), http::status::not_found);

    boost::asio::io_context ioc;
    websocket::stream<tcp::socket> ws(ioc);
    ws.next_layer().connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port));
    ws.handshake("127.0.0.1", "/session");
    std::int64_t seq = 0;
    auto send = [&](std::string_view type, ordered_json payload) {
        ws.write(boost::asio::buffer(Envelope{std::string(type), "", ++seq, std::move(payload)}.serialize()));
    };
    auto read_until = [&](std::string_view type) {
        for (;;) {
            beast::flat_buffer b;
            ws.read(b);
            Envelope e = Envelope::parse(beast::buffers_to_string(b.data()), std::numeric_limits<std::size_t>::max());
            if (e.type == type) return e;
        }
    };
    send(msg::session_start, {{"proto", "voice/1"}, {"mode", "text"}});
    const std::string id = read_until(msg::session_accepted).payload["session_id"];
    send(msg::text_turn, {{"text", kLine1}});
    send(msg::text_turn, {{"text", kLine2}});
    send(msg::text_turn, {{"text", kLine3}});
    EXPECT_EQ(read_until(msg::video_request).payload["component"], "facial");

    const auto put = http_call(port, http::verb::put, "/sessions/" + id + "/videos/facial", "\x1a\x45\xdf\xa3 clip",
                               "video/webm");
    ASSERT_EQ(put.result(), http::status::ok) << put.body();
    const std::string vid = ordered_json::parse(put.body())["video_id"];
    EXPECT_EQ(http_call(port, http::verb::put, "/sessions/" + id + "/videos/facial", "x", "text/plain").result(),
              http::status::unsupported_media_type);
    send(msg::video_complete, {{"video_id", vid}});
    send(msg::session_end, ordered_json::object());
    const std::string streamed = read_until(msg::report_final).payload["report_json"];

    const auto get = http_call(port, http::verb::get, "/sessions/" + id + "/report");
    EXPECT_EQ(get.result(), http::status::ok);
    EXPECT_EQ(get.body(), streamed);
    EXPECT_EQ(http_call(port, http::verb::get, "/sessions/" + id + "/videos/facial").body(), "\x1a\x45\xdf\xa3 clip");
    EXPECT_EQ(http_call(port, http::verb::get, "/sessions/none/report").result(), http::status::not_found);
    server.stop();
}
