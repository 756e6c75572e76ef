#include "mhc/server/session.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/rotation.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mhc::server {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

std::string errno_text() { return std::strerror(errno); }

// Write side of the client socket; every send goes through one mutex so
// lines never interleave.
class Connection {
 public:
  explicit Connection(int fd) : fd_(fd) {}

  bool send(MessageKind kind, nlohmann::json body) {
    std::lock_guard lock(mu_);
    if (closed_) return false;
    const std::string line = encode_line(seq_.next(kind, std::move(body)));
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::send(fd_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        closed_ = true;
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  /// Sends nothing further and wakes a blocked reader.
  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    ::shutdown(fd_, SHUT_RDWR);
  }

  /// Optionally one last message, then close, atomically.
  void send_and_close(MessageKind kind, nlohmann::json body) {
    std::lock_guard lock(mu_);
    if (!closed_) {
      const std::string line = encode_line(seq_.next(kind, std::move(body)));
      std::size_t off = 0;
      while (off < line.size()) {
        const ssize_t n = ::send(fd_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        off += static_cast<std::size_t>(n);
      }
    }
    closed_ = true;
    ::shutdown(fd_, SHUT_RDWR);
  }

  int fd() const { return fd_; }

 private:
  int fd_;
  std::mutex mu_;
  Sequencer seq_;
  bool closed_ = false;
};

struct LiveDirective {
  std::shared_ptr<const Directive> directive;
  bool held = true;  // joystick command: stay on frame 0
  std::uint64_t version = 0;
};

}  // namespace

void ServeConfig::validate() const {
  if (port < 0 || port > 65535) throw std::invalid_argument("port must be in [0, 65535]");
  if (max_frames < 0) throw std::invalid_argument("max_frames must be >= 0");
  if (metrics_every < 1) throw std::invalid_argument("metrics_every must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
}

SessionServer::SessionServer(ServeConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error("socket: " + errno_text());
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(cfg_.port));
  if (::inet_pton(AF_INET, cfg_.bind.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error("bad bind address '" + cfg_.bind + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const int err = errno;
    ::close(listen_fd_);
    if (err == EADDRINUSE) throw PortInUse("port " + std::to_string(cfg_.port) + " is already in use");
    throw Error("bind: " + std::string(std::strerror(err)));
  }
  if (::listen(listen_fd_, 1) < 0) {
    ::close(listen_fd_);
    throw Error("listen: " + errno_text());
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

SessionServer::~SessionServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

ServeResult SessionServer::run(const learn::PolicyBundle& bundle, const sim::Simulator& sim, const Pose& initial,
                               const adversary::DiscriminatorEnsemble* disc) {
  int fd = -1;
  do {
    fd = ::accept(listen_fd_, nullptr, nullptr);
  } while (fd < 0 && errno == EINTR);
  if (fd < 0) throw Error("accept: " + errno_text());
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

  const int J = sim.skeleton().joint_count();
  Connection conn(fd);
  ServeResult result;
  std::mutex live_mu;
  std::string end;  // first reason wins
  std::atomic<bool> stop{false};
  auto finish = [&](const std::string& why) {
    std::lock_guard lock(live_mu);
    if (end.empty()) end = why;
    stop = true;
  };

  LiveDirective live;
  {
    const double yaw = motion::yaw_of(initial.root.rotation());
    live.directive = std::make_shared<const Directive>(
        directive::joystick_directive(RootCommand{0.0, yaw, yaw, 0.85}, cfg_.horizon + 1, J, cfg_.horizon));
  }

  std::thread reader([&] {
    std::string buf;
    char chunk[4096];
    for (;;) {
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        finish("disconnect");
        return;
      }
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buf.find('\n')) != std::string::npos) {
        const std::string line = buf.substr(0, nl);
        buf.erase(0, nl + 1);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          const WireMessage m = decode_line(line);
          switch (m.kind) {
            case MessageKind::kHello: hello_from_json(m.body); break;
            case MessageKind::kDirectiveUpdate: {
              const DirectiveUpdate u = directive_update_from_json(m.body);
              auto d = std::make_shared<const Directive>(u.to_directive(J, cfg_.horizon));
              std::lock_guard lock(live_mu);
              live.directive = std::move(d);
              live.held = u.command.has_value();
              ++live.version;
              break;
            }
            case MessageKind::kBye:
              finish("bye");
              conn.send_and_close(MessageKind::kBye, to_json(Bye{"client said bye"}));
              return;
            default: throw ProtocolError("clients may not send " + to_string(m.kind));
          }
        } catch (const ProtocolError& e) {
          {
            std::lock_guard lock(live_mu);
            result.error = e.what();
          }
          finish("protocol_error");
          conn.send_and_close(MessageKind::kError, to_json(ErrorBody{"protocol_error", e.what()}));
          return;
        }
      }
      if (buf.size() > kMaxLine) {
        finish("protocol_error");
        conn.send_and_close(MessageKind::kError, to_json(ErrorBody{"protocol_error", "line too long"}));
        return;
      }
    }
  });

  conn.send(MessageKind::kHello, to_json(Hello{"server", sim.skeleton().name(), J, 1.0 / sim.config().control_dt()}));

  sim::SimState state = sim.reset(initial);
  std::deque<Pose> history(adversary::kWindowLength, state.pose);
  std::uint64_t seen_version = 0;
  int t = 0;
  MetricsFrame window;
  auto window_start = std::chrono::steady_clock::now();
  const auto period = std::chrono::duration<double>(sim.config().control_dt());
  auto next_tick = std::chrono::steady_clock::now();

  try {
    while (!stop) {
      if (cfg_.max_frames > 0 && result.frames >= cfg_.max_frames) {
        finish("max_frames");
        conn.send(MessageKind::kBye, to_json(Bye{"max_frames"}));
        break;
      }
      std::shared_ptr<const Directive> d;
      bool held = true;
      {
        std::lock_guard lock(live_mu);
        d = live.directive;
        held = live.held;
        if (live.version != seen_version) {
          seen_version = live.version;
          t = 0;
        }
      }
      const auto [next, info] = sim.step(state, bundle.act(state.pose, *d, t));
      const Pose& target = d->at(t + 1);
      const auto tr = reward::tracking_reward(next.pose, target, d->mask);
      const double energy = reward::energy_cost(info.action, info.prev_action, info.mean_torque);
      std::array<double, 5> parts{};
      history.pop_front();
      history.push_back(next.pose);
      if (disc) parts = adversary::style_reward(*disc, adversary::window_features({history.begin(), history.end()})).first;
      StateFrame f;
      f.frame = result.frames;
      f.sim_time = next.time;
      f.pose = next.pose;
      f.fallen = next.fallen;
      f.reward = reward::compose(tr, parts, energy);
      state = next;
      if (!held && t + 1 < d->length()) ++t;
      ++result.frames;

      if (!conn.send(MessageKind::kStateFrame, to_json(f))) {
        finish("disconnect");
        break;
      }
      ++window.frames;
      window.mean_r_tr += f.reward.r_tr;
      window.mean_total += f.reward.total;
      window.falls += f.fallen ? 1 : 0;
      if (window.frames == cfg_.metrics_every) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - window_start).count();
        window.fps = secs > 0.0 ? window.frames / secs : 0.0;
        window.mean_r_tr /= window.frames;
        window.mean_total /= window.frames;
        window.frames = result.frames;
        conn.send(MessageKind::kMetricsFrame, to_json(window));
        window = MetricsFrame{};
        window_start = std::chrono::steady_clock::now();
      }
      if (cfg_.realtime) {
        next_tick += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
        std::this_thread::sleep_until(next_tick);
      }
    }
  } catch (...) {
    conn.close();
    reader.join();
    ::close(fd);
    throw;
  }
  conn.close();
  reader.join();
  ::close(fd);
  std::lock_guard lock(live_mu);
  result.end = end;
  return result;
}

}  // namespace mhc::server
