#include "voice/gateway/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <deque>
#include <regex>

namespace voice::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response make_response(const Request& req, http::status status, std::string body,
                       std::string_view content_type = "application/json") {
    Response res{status, req.version()};
    res.set(http::field::server, "voice-gateway");
    res.set(http::field::content_type, beast::string_view(content_type.data(), content_type.size()));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
}

std::string error_body(std::string_view code, std::string_view detail) {
    return ordered_json{{"code", code}, {"detail", detail}}.dump();
}

Response route(Gateway& gateway, const Request& req) {
    static const std::regex video_path(R"(^/sessions/([A-Za-z0-9_.-]+)/videos/([a-z]+)$)");
    static const std::regex report_path(R"(^/sessions/([A-Za-z0-9_.-]+)/report$)");
    const std::string target(req.target());
    std::smatch m;

    if (target == "/healthz" && req.method() == http::verb::get) {
        return make_response(req, http::status::ok, R"({"status":"ok"})");
    }
    if (std::regex_match(target, m, video_path)) {
        if (req.method() == http::verb::put) {
            std::optional<double> duration;
            if (auto it = req.find("X-Video-Duration"); it != req.end()) {
                try {
                    duration = std::stod(std::string(it->value()));
                } catch (const std::exception&) {
                    return make_response(req, http::status::bad_request,
                                         error_body("BAD_DURATION", "X-Video-Duration must be a number"));
                }
            }
            try {
                const std::string id = gateway.upload_video(m[1], m[2].str(), req.body(),
                                                            std::string(req[http::field::content_type]), duration);
                return make_response(req, http::status::ok, ordered_json{{"video_id", id}}.dump());
            } catch (const UploadError& e) {
                return make_response(req, static_cast<http::status>(e.status()), error_body(e.code(), e.what()));
            }
        }
        if (req.method() == http::verb::get) {
            if (auto bytes = gateway.load_video(m[1], m[2].str())) {
                return make_response(req, http::status::ok, std::move(*bytes), "application/octet-stream");
            }
            return make_response(req, http::status::not_found, error_body("NOT_FOUND", "no such video"));
        }
        return make_response(req, http::status::method_not_allowed, error_body("METHOD", "use PUT or GET"));
    }
    if (std::regex_match(target, m, report_path) && req.method() == http::verb::get) {
        try {
            return make_response(req, http::status::ok, gateway.load_report(m[1]));
        } catch (const NotFound& e) {
            return make_response(req, http::status::not_found, error_body("NOT_FOUND", e.what()));
        }
    }
    return make_response(req, http::status::not_found, error_body("NOT_FOUND", "no route for " + target));
}

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, Gateway& gateway) : ws_(std::move(socket)), gateway_(gateway) {}

    void run(Request req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(kMaxMessageBytes * 4);
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

    // Sink side: may be called from any thread.
    void enqueue(std::string text) {
        asio::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
            self->outbox_.push_back(std::move(text));
            if (self->outbox_.size() == 1 && !self->writing_) self->write_next();
        });
    }

    void request_close() {
        asio::post(ws_.get_executor(), [self = shared_from_this()] {
            self->close_requested_ = true;
            if (!self->writing_ && self->outbox_.empty()) self->do_close();
        });
    }

private:
    class SinkAdapter : public Sink {
    public:
        explicit SinkAdapter(std::weak_ptr<WsSession> s) : session_(std::move(s)) {}
        void send(std::string text) override {
            if (auto s = session_.lock()) s->enqueue(std::move(text));
        }
        void close() override {
            if (auto s = session_.lock()) s->request_close();
        }

    private:
        std::weak_ptr<WsSession> session_;
    };

    void on_accept(beast::error_code ec) {
        if (ec) return;
        connection_ = gateway_.connect(std::make_shared<SinkAdapter>(weak_from_this()));
        read();
    }

    void read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            if (connection_) connection_->on_close();
            return;
        }
        std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        connection_->on_message(text);
        if (!closed_) read();
    }

    void write_next() {
        if (outbox_.empty()) {
            if (close_requested_) do_close();
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            self->writing_ = false;
                            self->outbox_.pop_front();
                            if (ec) {
                                self->outbox_.clear();
                                return;
                            }
                            self->write_next();
                        });
    }

    void do_close() {
        if (closed_) return;
        closed_ = true;
        ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
    }

    websocket::stream<beast::tcp_stream> ws_;
    Gateway& gateway_;
    std::shared_ptr<Connection> connection_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    bool writing_ = false;
    bool close_requested_ = false;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, Gateway& gateway) : stream_(std::move(socket)), gateway_(gateway) {}

    void run() { read(); }

private:
    void read() {
        parser_.emplace();
        parser_->body_limit(kMaxVideoBytes + 1024 * 1024);
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, *parser_,
                         beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec == http::error::end_of_stream) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        if (ec == http::error::body_limit) {
            Request req;
            req.version(11);
            req.keep_alive(false);
            send(make_response(req, http::status::payload_too_large, error_body("TOO_LARGE", "video exceeds 50 MB")));
            return;
        }
        if (ec) return;
        Request req = parser_->release();
        if (websocket::is_upgrade(req)) {
            if (req.target() != "/session") {
                send(make_response(req, http::status::not_found, error_body("NOT_FOUND", "use /session")));
                return;
            }
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), gateway_)->run(std::move(req));
            return;
        }
        send(route(gateway_, req));
    }

    void send(Response res) {
        auto sp = std::make_shared<Response>(std::move(res));
        http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (sp->need_eof()) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->read();
        });
    }

    beast::tcp_stream stream_;
    Gateway& gateway_;
    beast::flat_buffer buffer_;
    std::optional<http::request_parser<http::string_body>> parser_;
};

}  // namespace

struct Server::Impl {
    Impl(Gateway& g, const std::string& address, unsigned short port)
        : gateway(g), acceptor(ioc), reaper(ioc), work(asio::make_work_guard(ioc)) {
        beast::error_code ec;
        const auto addr = asio::ip::make_address(address, ec);
        if (ec) throw std::runtime_error("invalid listen address '" + address + "': " + ec.message());
        const tcp::endpoint endpoint(addr, port);
        acceptor.open(endpoint.protocol(), ec);
        if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
        if (!ec) acceptor.bind(endpoint, ec);
        if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
        if (ec) {
            throw std::runtime_error("cannot listen on " + address + ":" + std::to_string(port) + ": " +
                                     ec.message());
        }
        accept();
        schedule_reaper();
    }

    void accept() {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<HttpSession>(std::move(socket), gateway)->run();
            accept();
        });
    }

    void schedule_reaper() {
        reaper.expires_after(std::chrono::seconds(5));
        reaper.async_wait([this](beast::error_code ec) {
            if (ec) return;
            if (auto n = gateway.reap_idle()) spdlog::info("aborted {} idle session(s)", n);
            schedule_reaper();
        });
    }

    void stop() {
        if (stopped.exchange(true)) return;
        gateway.shutdown();
        asio::post(ioc, [this] {
            beast::error_code ignored;
            acceptor.close(ignored);
            reaper.cancel();
            work.reset();
        });
        // Give queued abort reports a moment to flush before forcing the loop down.
        asio::post(ioc, [this] {
            auto timer = std::make_shared<asio::steady_timer>(ioc, std::chrono::milliseconds(250));
            timer->async_wait([this, timer](beast::error_code) { ioc.stop(); });
        });
    }

    Gateway& gateway;
    asio::io_context ioc;
    tcp::acceptor acceptor;
    asio::steady_timer reaper;
    asio::executor_work_guard<asio::io_context::executor_type> work;
    std::thread thread;
    std::atomic<bool> stopped{false};
};

Server::Server(Gateway& gateway, const std::string& address, unsigned short port)
    : impl_(std::make_unique<Impl>(gateway, address, port)) {}

Server::~Server() {
    stop();
}

unsigned short Server::port() const {
    return impl_->acceptor.local_endpoint().port();
}

void Server::start() {
    impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::run() {
    impl_->ioc.run();
}

void Server::stop() {
    impl_->stop();
    if (impl_->thread.joinable() && impl_->thread.get_id() != std::this_thread::get_id()) impl_->thread.join();
}

std::pair<std::string, unsigned short> parse_listen_address(const std::string& text) {
    const auto colon = text.rfind(':');
    std::string host = colon == std::string::npos ? "0.0.0.0" : text.substr(0, colon);
    const std::string port_text = colon == std::string::npos ? text : text.substr(colon + 1);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    if (host.empty() || host == "localhost") host = host.empty() ? "0.0.0.0" : "127.0.0.1";
    int port = -1;
    try {
        std::size_t used = 0;
        port = std::stoi(port_text, &used);
        if (used != port_text.size()) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw std::invalid_argument("invalid listen address '" + text + "'");
    return {host, static_cast<unsigned short>(port)};
}

}  // namespace voice::gateway
