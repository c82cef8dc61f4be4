#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sorts/scenario.hpp"

namespace sorts::live {

struct ServerOptions {
    std::string address = "127.0.0.1";
    /// 0 binds an ephemeral port; read the chosen one back with Server::port().
    std::uint16_t port = 0;
    /// Per-client outbound queue bound. Snapshots beyond it are dropped oldest first; results never are.
    std::size_t client_queue_limit = 64;
    /// Seed of the first session started without an explicit seed; later sessions count up from it.
    std::uint64_t seed_base = 1;
};

/// WebSocket and HTTP front end for live sessions.
///
/// One io thread serves every connection and only enqueues work. Each session runs its own tick
/// loop thread which owns all session mutation, so a slow client can never stall a tick.
///
/// Client messages: start {sector, opponent, opponent_sector?, seed?}, attach {session},
/// control {tick, airspeed, vertical_rate, heading_rate}, pause, resume.
/// Server messages: started, ack, snapshot, result, error.
/// HTTP: GET /health and GET /sessions/<id>/log (JSON lines).
class Server {
  public:
    Server(ExperimentSpec spec, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts serving on a background thread.
    void start();
    /// Stops every session and the io thread. Idempotent.
    void stop();
    std::uint16_t port() const;

    std::size_t session_count() const;
    /// Decision log of a session, if it exists.
    std::optional<std::vector<std::string>> session_log(const std::string& id) const;

    struct Impl;

  private:
    std::shared_ptr<Impl> impl_;
};

}  // namespace sorts::live
