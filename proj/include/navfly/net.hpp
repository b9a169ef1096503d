#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "navfly/episode.hpp"
#include "navfly/pipeline.hpp"
#include "navfly/policy.hpp"
#include "navfly/wire.hpp"

namespace navfly::net {

/// Thin RAII wrapper over a stream socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  static Socket connect_to(const std::string& host, std::uint16_t port);
  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  void write_all(const void* data, std::size_t len);
  /// Reads exactly `len` bytes; throws TransportError on EOF/failure.
  void read_exact(void* data, std::size_t len);
  /// Waits for readability; false on timeout.
  bool wait_readable(int timeout_ms);

 private:
  int fd_ = -1;
};

void write_frame(Socket& sock, const Message& msg);
/// Reads one full frame (header-driven length) and decodes it.
Message read_frame(Socket& sock);

/// Builds the per-session policy from the client's SessionInit.
using SessionPolicyFactory =
    std::function<std::unique_ptr<policy::Policy>(const SessionInitPayload& init)>;

/// Accepts concurrent sessions; each runs SessionInit -> (Uplink ->
/// Downlink)* through its own pipelined executor. Protocol violations
/// close the offending session with an Error frame, never the server.
class PolicyServer {
 public:
  PolicyServer(const std::string& bind_addr, std::uint16_t port, SessionPolicyFactory factory,
               PipelineConfig pipeline = {.vision_latency_ms = 0.0,
                                          .llm_latency_ms = 0.0,
                                          .ipc_overhead_ms = 0.0,
                                          .queue_capacity = 1});
  ~PolicyServer();

  std::uint16_t port() const { return port_; }
  /// Stops accepting, drains in-flight frames, joins all sessions.
  void stop();

 private:
  void accept_loop();
  void handle_session(Socket sock);

  SessionPolicyFactory factory_;
  PipelineConfig pipeline_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex sessions_mutex_;
  std::vector<std::thread> sessions_;
};

/// policy::Policy proxy that ships observations to a PolicyServer and
/// applies the returned velocity commands. On a downlink timeout the
/// fail-safe zero action (hover) is returned and the stale reply is
/// discarded later.
class RemotePolicy final : public policy::Policy {
 public:
  RemotePolicy(const std::string& host, std::uint16_t port, const std::string& instruction,
               std::optional<double> goal_hint, int timeout_ms = 500);
  policy::PolicyOutput act(const policy::PolicyInput& input) override;
  int zero_action_ticks() const { return zero_action_ticks_; }

 private:
  Socket sock_;
  std::uint64_t next_frame_id_ = 1;
  int timeout_ms_;
  int zero_action_ticks_ = 0;
};

/// Runs the simulated control loop against a remote server: depth + state
/// up, velocity commands down. Connection loss aborts the episode.
eval::EpisodeOutcome fly_client(const std::string& host, std::uint16_t port,
                                const world::Scene& scene, const world::TargetInstance& goal,
                                const std::string& instruction,
                                const eval::EpisodeLimits& limits, Rng& rng,
                                int timeout_ms = 500, const eval::StepSink& sink = nullptr,
                                const world::UavState* start = nullptr);

}  // namespace navfly::net
