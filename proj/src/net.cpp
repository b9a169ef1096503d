#include "navfly/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "navfly/log.hpp"

namespace navfly::net {

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Socket Socket::connect_to(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket() failed");
  Socket sock(fd);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw TransportError("bad address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw TransportError("connect to " + host + ":" + std::to_string(port) + " failed: " +
                         std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

void Socket::write_all(const void* data, std::size_t len) {
  const char* p = static_cast<const char*>(data);
  while (len > 0) {
    const ssize_t n = ::send(fd_, p, len, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      throw TransportError("send failed: " + std::string(std::strerror(errno)));
    }
    p += n;
    len -= static_cast<std::size_t>(n);
  }
}

void Socket::read_exact(void* data, std::size_t len) {
  char* p = static_cast<char*>(data);
  while (len > 0) {
    const ssize_t n = ::recv(fd_, p, len, 0);
    if (n == 0) throw TransportError("connection closed by peer");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("recv failed: " + std::string(std::strerror(errno)));
    }
    p += n;
    len -= static_cast<std::size_t>(n);
  }
}

bool Socket::wait_readable(int timeout_ms) {
  pollfd pfd{fd_, POLLIN, 0};
  for (;;) {
    const int rc = ::poll(&pfd, 1, timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError("poll failed: " + std::string(std::strerror(errno)));
    }
    return rc > 0;
  }
}

void write_frame(Socket& sock, const Message& msg) {
  const std::string frame = encode_frame(msg);
  sock.write_all(frame.data(), frame.size());
}

Message read_frame(Socket& sock) {
  std::string buf(kHeaderSize, '\0');
  sock.read_exact(buf.data(), kHeaderSize);
  const std::size_t total = frame_size_from_header(buf);
  buf.resize(total);
  sock.read_exact(buf.data() + kHeaderSize, total - kHeaderSize);
  return decode_frame(buf);
}

// ---------------------------------------------------------------------------

PolicyServer::PolicyServer(const std::string& bind_addr, std::uint16_t port,
                           SessionPolicyFactory factory, PipelineConfig pipeline)
    : factory_(std::move(factory)), pipeline_(pipeline) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket() failed");
  listener_ = Socket(fd);
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_addr.c_str(), &addr.sin_addr) != 1) {
    throw TransportError("bad bind address: " + bind_addr);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw TransportError("bind to " + bind_addr + ":" + std::to_string(port) + " failed: " +
                         std::strerror(errno));
  }
  if (::listen(fd, 16) != 0) throw TransportError("listen failed");

  sockaddr_in bound{};
  socklen_t bound_len = sizeof(bound);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &bound_len);
  port_ = ntohs(bound.sin_port);

  acceptor_ = std::thread([this] { accept_loop(); });
}

PolicyServer::~PolicyServer() { stop(); }

void PolicyServer::stop() {
  if (stopping_.exchange(true)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  listener_.close();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> sessions;
  {
    std::lock_guard lock(sessions_mutex_);
    sessions.swap(sessions_);
  }
  for (auto& t : sessions) {
    if (t.joinable()) t.join();
  }
}

void PolicyServer::accept_loop() {
  for (;;) {
    const int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) return;
      if (errno == EINTR) continue;
      return;  // listener closed
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(sessions_mutex_);
    sessions_.emplace_back([this, fd] { handle_session(Socket(fd)); });
  }
}

void PolicyServer::handle_session(Socket sock) {
  std::unique_ptr<policy::Policy> pol;
  SessionInitPayload session;
  try {
    Message first = read_frame(sock);
    const auto* init = std::get_if<SessionInitPayload>(&first);
    if (init == nullptr) {
      write_frame(sock, ErrorPayload{1, "expected SessionInit"});
      return;
    }
    session = *init;
    pol = factory_(session);
  } catch (const ProtocolError& e) {
    try {
      write_frame(sock, ErrorPayload{2, e.what()});
    } catch (...) {
    }
    return;
  } catch (const std::exception& e) {
    log::warn("session setup failed: %s", e.what());
    try {
      write_frame(sock, ErrorPayload{3, e.what()});
    } catch (...) {
    }
    return;
  }

  const auto vision_fn = [this, &session](const UplinkPayload& up) {
    sleep_ms(pipeline_.vision_latency_ms);
    policy::PolicyInput in;
    in.state.position = world::Vec3(up.state[0], up.state[1], up.state[2]);
    in.state.yaw = up.state[3];
    in.state.clock_s = up.state[4];
    in.depth.width = up.depth_width;
    in.depth.height = up.depth_height;
    in.depth.ranges = up.depth_ranges;
    in.instruction = session.instruction;
    in.goal_hint = session.goal_hint;
    return in;
  };
  const auto llm_fn = [this, &pol](const policy::PolicyInput& in) {
    sleep_ms(pipeline_.llm_latency_ms);
    return pol->act(in).action;
  };
  TwoStagePipeline<UplinkPayload, policy::PolicyInput, world::VelocityAction> pipe(
      vision_fn, llm_fn, pipeline_);

  std::atomic<bool> session_failed{false};
  std::thread writer([&] {
    while (auto result = pipe.pop()) {
      try {
        if (result->failed) {
          write_frame(sock, ErrorPayload{4, result->error});
          session_failed = true;
          return;
        }
        DownlinkPayload down;
        down.frame_id = result->id;
        down.action = {result->value.forward_mps, result->value.yaw_rate_radps,
                       result->value.vertical_mps};
        down.server_latency_us = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(result->completed -
                                                                  result->vision_start)
                .count());
        write_frame(sock, down);
      } catch (const std::exception&) {
        session_failed = true;  // client went away; drain silently
      }
    }
  });

  try {
    while (!stopping_ && !session_failed) {
      if (!sock.wait_readable(100)) continue;
      Message msg = read_frame(sock);
      if (const auto* up = std::get_if<UplinkPayload>(&msg)) {
        pipe.push(up->frame_id, *up);
      } else if (std::holds_alternative<HeartbeatPayload>(msg)) {
        // liveness only
      } else {
        write_frame(sock, ErrorPayload{5, "unexpected message type mid-session"});
        break;
      }
    }
  } catch (const TransportError&) {
    // client disconnected; drain and exit
  } catch (const ProtocolError& e) {
    try {
      write_frame(sock, ErrorPayload{6, e.what()});
    } catch (...) {
    }
  }
  pipe.stop();
  writer.join();
}

// ---------------------------------------------------------------------------

RemotePolicy::RemotePolicy(const std::string& host, std::uint16_t port,
                           const std::string& instruction, std::optional<double> goal_hint,
                           int timeout_ms)
    : sock_(Socket::connect_to(host, port)), timeout_ms_(timeout_ms) {
  write_frame(sock_, SessionInitPayload{instruction, goal_hint});
}

policy::PolicyOutput RemotePolicy::act(const policy::PolicyInput& input) {
  UplinkPayload up;
  up.frame_id = next_frame_id_++;
  up.timestamp_us = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now().time_since_epoch())
          .count());
  up.state = {input.state.position.x(), input.state.position.y(), input.state.position.z(),
              input.state.yaw,          input.state.clock_s,      0.0,
              0.0};
  up.depth_width = static_cast<std::uint16_t>(input.depth.width);
  up.depth_height = static_cast<std::uint16_t>(input.depth.height);
  up.depth_ranges = input.depth.ranges;
  write_frame(sock_, up);

  for (;;) {
    if (!sock_.wait_readable(timeout_ms_)) {
      ++zero_action_ticks_;
      policy::PolicyOutput out;
      out.action = {};  // fail-safe hover
      out.aux["downlink_timeout"] = 1.0;
      return out;
    }
    Message msg = read_frame(sock_);
    if (const auto* down = std::get_if<DownlinkPayload>(&msg)) {
      if (down->frame_id < up.frame_id) continue;  // stale reply from a timed-out frame
      if (down->frame_id > up.frame_id) {
        throw TransportError("downlink for future frame " + std::to_string(down->frame_id));
      }
      policy::PolicyOutput out;
      out.action = {down->action[0], down->action[1], down->action[2]};
      out.aux["server_latency_us"] = static_cast<double>(down->server_latency_us);
      return out;
    }
    if (const auto* err = std::get_if<ErrorPayload>(&msg)) {
      throw TransportError("server error " + std::to_string(err->code) + ": " + err->message);
    }
    // heartbeats are ignored
  }
}

eval::EpisodeOutcome fly_client(const std::string& host, std::uint16_t port,
                                const world::Scene& scene, const world::TargetInstance& goal,
                                const std::string& instruction,
                                const eval::EpisodeLimits& limits, Rng& rng, int timeout_ms,
                                const eval::StepSink& sink, const world::UavState* start) {
  // The coarse guidance in SessionInit is the initial bearing, so the
  // spawn is fixed here first; run_episode then consumes no further RNG
  // and matches an in-process run with the same seed draw-for-draw.
  const world::UavState st = start != nullptr ? *start : eval::spawn_state(scene, rng);
  const double hint = std::atan2(goal.position.y() - st.position.y(),
                                 goal.position.x() - st.position.x());
  RemotePolicy pol(host, port, instruction, hint, timeout_ms);
  return eval::run_episode(scene, pol, goal, limits, rng, {}, instruction, sink, &st);
}

}  // namespace navfly::net
