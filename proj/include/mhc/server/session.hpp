#pragma once

#include "mhc/adversary/discriminator.hpp"
#include "mhc/learn/policy.hpp"
#include "mhc/server/wire.hpp"
#include "mhc/sim/sim.hpp"

#include <string>

namespace mhc::server {

struct ServeConfig {
  int port = 7878;  // 0 picks a free port
  std::string bind = "127.0.0.1";
  bool realtime = true;  // 30 Hz wall clock; false runs as fast as possible
  long max_frames = 0;   // 0: until the client leaves
  int metrics_every = 30;
  int horizon = 10;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct ServeResult {
  long frames = 0;
  std::string end;  // "bye", "disconnect", "protocol_error" or "max_frames"
  std::string error;  // message sent to the client on a protocol error
};

/// One steering session over a TCP socket speaking mhc-wire/1. A reader
/// thread parses client lines and swaps the live directive; the simulation
/// loop streams a state_frame per control step and a metrics_frame every
/// `metrics_every` steps. The last directive is held until replaced.
class SessionServer {
 public:
  /// Binds and listens. Throws PortInUse, or Error for other socket failures.
  explicit SessionServer(ServeConfig cfg);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  int port() const { return port_; }

  /// Accepts one client and runs until it leaves, misbehaves or
  /// max_frames is reached. A protocol error is answered with one error
  /// message and a close; it is not an exception here.
  ServeResult run(const learn::PolicyBundle& bundle, const sim::Simulator& sim, const Pose& initial,
                  const adversary::DiscriminatorEnsemble* disc = nullptr);

 private:
  ServeConfig cfg_;
  int listen_fd_ = -1;
  int port_ = 0;
};

}  // namespace mhc::server
