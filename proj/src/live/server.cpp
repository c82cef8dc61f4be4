#include "sorts/live/server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "sorts/live/session.hpp"

namespace sorts::live {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

std::string error_message(const std::string& what) {
    return nlohmann::json{{"type", "error"}, {"version", kProtocolVersion}, {"error", what}}.dump();
}

}  // namespace

class WsClient;

// Owns one Session and the thread that ticks it. I/O handlers touch only the inbox and flags
// under the mutex; the session object itself is used by the tick thread alone.
class LiveSession {
  public:
    LiveSession(std::string id, std::shared_ptr<const Environment> env, const ExperimentSpec& spec,
                const StartOptions& options, std::uint64_t seed)
        : session_(std::move(id), std::move(env), spec, options, seed),
          period_(std::chrono::milliseconds(spec.live.tick_period_ms)),
          budget_(std::chrono::duration_cast<std::chrono::nanoseconds>(period_ * spec.live.planner_budget_fraction)),
          grace_(std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(spec.live.disconnect_grace_s))),
          initial_(session_.snapshot_message().dump()) {}

    ~LiveSession() { stop(); }

    const std::string& id() const { return session_.id(); }
    nlohmann::json started_message() const {
        const auto snap = nlohmann::json::parse(initial_);
        return {{"type", "started"},
                {"version", kProtocolVersion},
                {"session", session_.id()},
                {"human_id", session_.human_id()},
                {"seed", session_.seed()},
                {"tick_period_ms", std::chrono::duration_cast<std::chrono::milliseconds>(period_).count()},
                {"snapshot", snap}};
    }

    void run() {
        thread_ = std::thread([this] { loop(); });
    }

    void stop() {
        {
            std::lock_guard lk(m_);
            stopping_ = true;
        }
        cv_.notify_all();
        if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id())
            thread_.join();
    }

    ControlAck enqueue_control(int tick, const Control& c) {
        ControlAck ack;
        ack.tick = tick;
        std::lock_guard lk(m_);
        ack.current_tick = tick_;
        if (finished_) {
            ack.error = "session finished";
        } else if (tick < tick_) {
            ack.error = "stale tick " + std::to_string(tick) + ", current tick is " + std::to_string(tick_);
        } else {
            try {
                ack.quantized = quantize(c);
                ack.accepted = true;
                inbox_.emplace_back(tick, c);
            } catch (const ProtocolError& e) {
                ack.error = e.what();
            }
        }
        return ack;
    }

    void set_paused(bool paused) {
        {
            std::lock_guard lk(m_);
            paused_ = paused;
        }
        cv_.notify_all();
    }

    void attach(const std::shared_ptr<WsClient>& client);
    void detach(const WsClient* client) {
        std::lock_guard lk(m_);
        if (client_.lock().get() == client || client_.expired()) {
            client_.reset();
            disconnected_at_ = Clock::now();
        }
    }

    std::vector<std::string> log() const {
        std::lock_guard lk(m_);
        return log_;
    }

  private:
    void loop();

    Session session_;
    Clock::duration period_;
    std::chrono::nanoseconds budget_;
    Clock::duration grace_;
    std::string initial_;

    mutable std::mutex m_;
    std::condition_variable cv_;
    bool stopping_ = false;
    bool paused_ = false;
    bool finished_ = false;
    int tick_ = 0;
    std::vector<std::pair<int, Control>> inbox_;
    std::weak_ptr<WsClient> client_;
    std::optional<Clock::time_point> disconnected_at_;
    std::string last_snapshot_;
    std::string result_;
    std::vector<std::string> log_;
    std::thread thread_;
};

// One WebSocket connection. All members are touched only on the io thread.
class WsClient : public std::enable_shared_from_this<WsClient> {
  public:
    WsClient(tcp::socket socket, Server::Impl& server, std::size_t queue_limit)
        : ws_(std::move(socket)), server_(server), limit_(queue_limit) {}

    void accept(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec)
                return spdlog::debug("websocket accept failed: {}", ec.message());
            self->read();
        });
    }

    // Thread-safe: hops onto the io thread before touching the queue.
    void send(std::string text, bool droppable) {
        net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text), droppable]() mutable {
            self->enqueue(std::move(text), droppable);
        });
    }

  private:
    struct Outbound {
        std::string text;
        bool droppable = true;
    };

    void enqueue(std::string text, bool droppable) {
        if (closed_)
            return;
        if (droppable && queue_.size() >= limit_) {
            // Never touch the element being written.
            const auto first = queue_.begin() + (writing_ ? 1 : 0);
            const auto victim = std::find_if(first, queue_.end(), [](const Outbound& o) { return o.droppable; });
            if (victim != queue_.end()) {
                queue_.erase(victim);
                ++dropped_;
            } else {
                return;
            }
        }
        queue_.push_back({std::move(text), droppable});
        if (!writing_)
            write_next();
    }

    void write_next() {
        if (queue_.empty() || closed_) {
            writing_ = false;
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(net::buffer(queue_.front().text), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (!self->queue_.empty())
                self->queue_.pop_front();
            if (ec) {
                self->on_close();
                return;
            }
            self->write_next();
        });
    }

    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->on_close();
                return;
            }
            std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->handle(text);
            self->read();
        });
    }

    void on_close() {
        if (closed_)
            return;
        closed_ = true;
        queue_.clear();
        writing_ = false;
        if (session_)
            session_->detach(this);
    }

    void handle(const std::string& text);

    websocket::stream<beast::tcp_stream> ws_;
    Server::Impl& server_;
    std::size_t limit_;
    beast::flat_buffer buffer_;
    std::deque<Outbound> queue_;
    bool writing_ = false;
    bool closed_ = false;
    std::size_t dropped_ = 0;
    std::shared_ptr<LiveSession> session_;
};

void LiveSession::attach(const std::shared_ptr<WsClient>& client) {
    std::string snapshot, result;
    {
        std::lock_guard lk(m_);
        client_ = client;
        disconnected_at_.reset();
        snapshot = last_snapshot_;
        result = result_;
    }
    cv_.notify_all();
    if (!snapshot.empty())
        client->send(snapshot, true);
    if (!result.empty())
        client->send(result, false);
}

void LiveSession::loop() {
    auto next = Clock::now() + period_;
    for (;;) {
        std::vector<std::pair<int, Control>> inbox;
        std::shared_ptr<WsClient> client;
        {
            std::unique_lock lk(m_);
            if (cv_.wait_until(lk, next, [&] { return stopping_; }))
                return;
            const auto now = Clock::now();
            const bool gone = disconnected_at_ && now - *disconnected_at_ >= grace_;
            if (paused_ || gone) {
                if (gone && !paused_)
                    spdlog::info("session {}: client gone, clock paused", session_.id());
                cv_.wait(lk, [&] { return stopping_ || (!paused_ && !disconnected_at_); });
                if (stopping_)
                    return;
                next = Clock::now() + period_;
                continue;
            }
            inbox.swap(inbox_);
            client = client_.lock();
        }

        for (const auto& [tick, control] : inbox)
            session_.submit_control(std::max(tick, session_.tick()), control);
        const auto start = session_.log_lines().size();
        std::string snapshot = session_.advance(budget_).dump();
        std::string result = session_.finished() ? session_.result_message().dump() : std::string();
        {
            std::lock_guard lk(m_);
            tick_ = session_.tick();
            log_.insert(log_.end(), session_.log_lines().begin() + static_cast<std::ptrdiff_t>(start),
                        session_.log_lines().end());
            last_snapshot_ = snapshot;
            if (!result.empty()) {
                result_ = result;
                finished_ = true;
            }
        }
        if (client) {
            client->send(std::move(snapshot), true);
            if (!result.empty())
                client->send(std::move(result), false);
        }
        if (session_.finished()) {
            spdlog::info("session {} finished at tick {}", session_.id(), session_.tick());
            return;
        }
        next += period_;
        if (next < Clock::now())
            next = Clock::now();
    }
}

struct Server::Impl {
    Impl(ExperimentSpec s, ServerOptions o)
        : spec(std::move(s)), options(o), env(std::make_shared<Environment>(make_environment(spec))), acceptor(ioc) {}

    ExperimentSpec spec;
    ServerOptions options;
    std::shared_ptr<const Environment> env;
    net::io_context ioc;
    tcp::acceptor acceptor;
    std::thread io_thread;
    std::atomic<std::uint16_t> bound_port{0};
    std::atomic<bool> running{false};

    mutable std::mutex sessions_m;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions;
    std::uint64_t next_session = 0;

    std::shared_ptr<LiveSession> create_session(const StartOptions& opts) {
        std::lock_guard lk(sessions_m);
        const std::uint64_t n = next_session++;
        const std::string id = "s" + std::to_string(n + 1);
        auto s = std::make_shared<LiveSession>(id, env, spec, opts, options.seed_base + n);
        sessions.emplace(id, s);
        return s;
    }

    std::shared_ptr<LiveSession> find(const std::string& id) const {
        std::lock_guard lk(sessions_m);
        const auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second;
    }

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != net::error::operation_aborted)
                    spdlog::warn("accept failed: {}", ec.message());
                return;
            }
            serve_http(std::move(socket));
            accept();
        });
    }

    void serve_http(tcp::socket socket);
    http::response<http::string_body> route(const http::request<http::string_body>& req);
};

void WsClient::handle(const std::string& text) {
    nlohmann::json msg;
    try {
        msg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        enqueue(error_message("malformed JSON"), false);
        return;
    }
    const std::string type = msg.is_object() ? msg.value("type", "") : "";
    try {
        if (type == "start") {
            if (session_)
                throw ProtocolError("start: this connection already has a session");
            const StartOptions opts = start_options_from_json(msg);
            auto s = server_.create_session(opts);
            session_ = s;
            enqueue(s->started_message().dump(), false);
            s->attach(shared_from_this());
            s->run();
            spdlog::info("session {} started", s->id());
        } else if (type == "attach") {
            if (session_)
                throw ProtocolError("attach: this connection already has a session");
            auto s = server_.find(msg.value("session", ""));
            if (!s)
                throw ProtocolError("attach: unknown session");
            session_ = s;
            enqueue(s->started_message().dump(), false);
            s->attach(shared_from_this());
        } else if (type == "control") {
            if (!session_)
                throw ProtocolError("control: no session");
            Control c;
            int tick = 0;
            try {
                tick = msg.at("tick").get<int>();
                c.airspeed = msg.at("airspeed").get<double>();
                c.vertical_rate = msg.at("vertical_rate").get<double>();
                c.heading_rate = msg.at("heading_rate").get<double>();
            } catch (const nlohmann::json::exception& e) {
                throw ProtocolError(std::string("control: ") + e.what());
            }
            enqueue(to_json(session_->enqueue_control(tick, c)).dump(), false);
        } else if (type == "pause" || type == "resume") {
            if (!session_)
                throw ProtocolError(type + ": no session");
            session_->set_paused(type == "pause");
        } else {
            throw ProtocolError("unknown message type '" + type + "'");
        }
    } catch (const ProtocolError& e) {
        enqueue(error_message(e.what()), false);
    }
}

http::response<http::string_body> Server::Impl::route(const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(false);
    const std::string target(req.target());
    const auto reply = [&](http::status status, std::string type, std::string body) {
        res.result(status);
        res.set(http::field::content_type, type);
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    };
    if (req.method() != http::verb::get)
        return reply(http::status::method_not_allowed, "text/plain", "GET only\n");
    if (target == "/health") {
        std::size_t n = 0;
        {
            std::lock_guard lk(sessions_m);
            n = sessions.size();
        }
        return reply(http::status::ok, "application/json",
                     nlohmann::json{{"status", "ok"}, {"version", kProtocolVersion}, {"sessions", n}}.dump() + "\n");
    }
    const std::string prefix = "/sessions/", suffix = "/log";
    if (target.size() > prefix.size() + suffix.size() && target.starts_with(prefix) && target.ends_with(suffix)) {
        const std::string id = target.substr(prefix.size(), target.size() - prefix.size() - suffix.size());
        if (const auto s = find(id)) {
            std::string body;
            for (const auto& line : s->log())
                body += line + "\n";
            return reply(http::status::ok, "application/x-ndjson", std::move(body));
        }
        return reply(http::status::not_found, "text/plain", "unknown session\n");
    }
    return reply(http::status::not_found, "text/plain", "not found\n");
}

void Server::Impl::serve_http(tcp::socket socket) {
    struct Conn : std::enable_shared_from_this<Conn> {
        beast::tcp_stream stream;
        beast::flat_buffer buffer;
        http::request<http::string_body> req;
        http::response<http::string_body> res;
        Server::Impl* server;
        Conn(tcp::socket s, Server::Impl* srv) : stream(std::move(s)), server(srv) {}

        void run() {
            stream.expires_after(std::chrono::seconds(30));
            http::async_read(stream, buffer, req, [self = shared_from_this()](beast::error_code ec, std::size_t) {
                if (ec)
                    return;
                if (websocket::is_upgrade(self->req)) {
                    self->stream.expires_never();
                    auto client = std::make_shared<WsClient>(self->stream.release_socket(), *self->server,
                                                             self->server->options.client_queue_limit);
                    client->accept(std::move(self->req));
                    return;
                }
                self->res = self->server->route(self->req);
                http::async_write(self->stream, self->res, [self](beast::error_code, std::size_t) {
                    beast::error_code ignored;
                    self->stream.socket().shutdown(tcp::socket::shutdown_send, ignored);
                });
            });
        }
    };
    std::make_shared<Conn>(std::move(socket), this)->run();
}

Server::Server(ExperimentSpec spec, ServerOptions options)
    : impl_(std::make_shared<Impl>(std::move(spec), options)) {}

Server::~Server() { stop(); }

void Server::start() {
    if (impl_->running.exchange(true))
        return;
    const tcp::endpoint ep(net::ip::make_address(impl_->options.address), impl_->options.port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
    impl_->bound_port = impl_->acceptor.local_endpoint().port();
    impl_->accept();
    impl_->io_thread = std::thread([impl = impl_.get()] {
        auto guard = net::make_work_guard(impl->ioc);
        impl->ioc.run();
    });
    spdlog::info("serving on {}:{}", impl_->options.address, impl_->bound_port.load());
}

void Server::stop() {
    if (!impl_ || !impl_->running.exchange(false))
        return;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions;
    {
        std::lock_guard lk(impl_->sessions_m);
        sessions = impl_->sessions;
    }
    for (auto& [id, s] : sessions)
        s->stop();
    net::post(impl_->ioc, [impl = impl_.get()] {
        beast::error_code ignored;
        impl->acceptor.close(ignored);
        impl->ioc.stop();
    });
    if (impl_->io_thread.joinable())
        impl_->io_thread.join();
}

std::uint16_t Server::port() const { return impl_->bound_port.load(); }

std::size_t Server::session_count() const {
    std::lock_guard lk(impl_->sessions_m);
    return impl_->sessions.size();
}

std::optional<std::vector<std::string>> Server::session_log(const std::string& id) const {
    if (const auto s = impl_->find(id))
        return s->log();
    return std::nullopt;
}

}  // namespace sorts::live
