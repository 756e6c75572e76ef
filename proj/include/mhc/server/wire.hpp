#pragma once

#include "mhc/directive/joystick.hpp"
#include "mhc/reward/reward.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mhc::server {

using directive::Directive;
using directive::RootCommand;
using motion::Pose;

inline constexpr const char* kWireProtocol = "mhc-wire/1";

enum class MessageKind { kHello, kDirectiveUpdate, kStateFrame, kMetricsFrame, kError, kBye };

std::string to_string(MessageKind k);
/// Throws ProtocolError.
MessageKind message_kind_from_string(const std::string& s);

/// One line on the wire: {"proto","kind","seq","t_ms","body"}. Unknown
/// top-level and body fields are ignored by the decoders.
struct WireMessage {
  MessageKind kind = MessageKind::kHello;
  std::uint64_t seq = 0;
  std::int64_t t_ms = 0;  // Unix epoch milliseconds
  nlohmann::json body = nlohmann::json::object();

  bool operator==(const WireMessage&) const = default;
};

/// JSON text plus the terminating newline.
std::string encode_line(const WireMessage& m);
/// Accepts the line with or without its newline. Throws ProtocolError.
WireMessage decode_line(std::string_view line);

/// Stamps strictly increasing sequence numbers and wall-clock times.
class Sequencer {
 public:
  WireMessage next(MessageKind kind, nlohmann::json body);
  std::uint64_t last() const { return seq_; }

 private:
  std::uint64_t seq_ = 0;
};

std::int64_t now_ms();

struct Hello {
  std::string role;  // "server" or "client"
  std::string skeleton;
  int joint_count = 0;
  double fps = 30.0;
};

/// Either a joystick command (expanded to a held root-fields directive) or
/// a full mhc-directive/1 document.
struct DirectiveUpdate {
  std::optional<RootCommand> command;
  nlohmann::json directive;  // null unless given

  /// Throws ProtocolError on an invalid directive.
  Directive to_directive(int joint_count, int horizon) const;
};

struct StateFrame {
  std::int64_t frame = 0;
  double sim_time = 0.0;
  Pose pose;
  bool fallen = false;
  reward::RewardBreakdown reward;
};

struct MetricsFrame {
  std::int64_t frames = 0;
  double fps = 0.0;        // achieved control rate over the window
  double mean_r_tr = 0.0;  // over the window
  double mean_total = 0.0;
  int falls = 0;  // frames spent fallen in the window
};

struct ErrorBody {
  std::string code;
  std::string message;
};

struct Bye {
  std::string reason;
};

nlohmann::json to_json(const Hello& h);
nlohmann::json to_json(const DirectiveUpdate& d);
nlohmann::json to_json(const StateFrame& s);
nlohmann::json to_json(const MetricsFrame& m);
nlohmann::json to_json(const ErrorBody& e);
nlohmann::json to_json(const Bye& b);

// Body decoders; all throw ProtocolError naming the bad field.
Hello hello_from_json(const nlohmann::json& j);
DirectiveUpdate directive_update_from_json(const nlohmann::json& j);
StateFrame state_frame_from_json(const nlohmann::json& j);
MetricsFrame metrics_frame_from_json(const nlohmann::json& j);
ErrorBody error_from_json(const nlohmann::json& j);
Bye bye_from_json(const nlohmann::json& j);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace mhc::server
