#include "mhc/server/wire.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/io.hpp"

#include <array>
#include <cmath>

namespace mhc::server {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 6> kKindNames{"hello", "directive_update", "state_frame",
                                                "metrics_frame", "error", "bye"};

// Runs a body decoder, turning schema and JSON errors into ProtocolError.
template <class F>
auto decode(const char* what, F&& f) {
  try {
    return f();
  } catch (const ProtocolError&) {
    throw;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string(what) + ": " + e.what());
  } catch (const Error& e) {
    throw ProtocolError(std::string(what) + ": " + e.what());
  }
}

double finite(const json& j, const char* field) {
  const double v = j.at(field).get<double>();
  if (!std::isfinite(v)) throw ProtocolError(std::string(field) + " must be finite");
  return v;
}

json vec_list(const std::vector<Vec3>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(motion::to_json(x));
  return a;
}

std::vector<Vec3> vec_list_from(const json& j, const char* what) {
  std::vector<Vec3> out;
  for (const auto& x : j) out.push_back(motion::vec3_from_json(x, what));
  return out;
}

}  // namespace

std::string to_string(MessageKind k) { return kKindNames[static_cast<int>(k)]; }

MessageKind message_kind_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (s == kKindNames[i]) return static_cast<MessageKind>(i);
  throw ProtocolError("unknown message kind '" + s + "'");
}

std::string encode_line(const WireMessage& m) {
  const json j = {{"proto", kWireProtocol}, {"kind", to_string(m.kind)}, {"seq", m.seq}, {"t_ms", m.t_ms},
                  {"body", m.body}};
  return j.dump() + "\n";
}

WireMessage decode_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  return decode("message", [&] {
    if (!j.is_object()) throw ProtocolError("message must be a JSON object");
    if (j.at("proto").get<std::string>() != kWireProtocol)
      throw ProtocolError("proto must be " + std::string(kWireProtocol));
    WireMessage m;
    m.kind = message_kind_from_string(j.at("kind").get<std::string>());
    if (!j.at("seq").is_number_unsigned()) throw ProtocolError("seq must be a non-negative integer");
    m.seq = j.at("seq").get<std::uint64_t>();
    m.t_ms = j.value("t_ms", std::int64_t{0});
    m.body = j.value("body", json::object());
    if (!m.body.is_object()) throw ProtocolError("body must be an object");
    return m;
  });
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

WireMessage Sequencer::next(MessageKind kind, json body) {
  return {kind, ++seq_, now_ms(), std::move(body)};
}

Directive DirectiveUpdate::to_directive(int joint_count, int horizon) const {
  return decode("directive_update", [&] {
    if (command) return directive::joystick_directive(*command, horizon + 1, joint_count, horizon);
    if (directive.is_null()) throw ProtocolError("directive_update needs a command or a directive");
    Directive d = directive::directive_from_json(directive, joint_count);
    d.validate(joint_count);
    return d;
  });
}

json pose_to_json(const Pose& p) {
  json rots = json::array();
  for (const auto& r : p.joint_rot) rots.push_back(motion::to_json(r));
  return {{"root", motion::root_to_json(p.root)},
          {"joint_rot6d", rots},
          {"joint_local_pos", vec_list(p.joint_local)},
          {"joint_global_pos", vec_list(p.joint_global)}};
}

Pose pose_from_json(const json& j) {
  return decode("pose", [&] {
    Pose p;
    p.root = motion::root_from_json(j.at("root"));
    for (const auto& r : j.at("joint_rot6d")) p.joint_rot.push_back(motion::rot6_from_json(r, "joint_rot6d"));
    p.joint_local = vec_list_from(j.at("joint_local_pos"), "joint_local_pos");
    p.joint_global = vec_list_from(j.at("joint_global_pos"), "joint_global_pos");
    if (p.joint_local.size() != p.joint_rot.size() || p.joint_global.size() != p.joint_rot.size())
      throw ProtocolError("pose channels disagree in joint count");
    return p;
  });
}

json to_json(const Hello& h) {
  return {{"role", h.role}, {"skeleton", h.skeleton}, {"joint_count", h.joint_count}, {"fps", h.fps}};
}

json to_json(const DirectiveUpdate& d) {
  json j = json::object();
  if (d.command)
    j["command"] = {{"speed", d.command->speed},
                    {"heading", d.command->heading},
                    {"facing", d.command->facing},
                    {"height", d.command->height}};
  if (!d.directive.is_null()) j["directive"] = d.directive;
  return j;
}

json to_json(const StateFrame& s) {
  const auto& r = s.reward;
  return {{"frame", s.frame},
          {"sim_time", s.sim_time},
          {"pose", pose_to_json(s.pose)},
          {"fallen", s.fallen},
          {"reward",
           {{"r_h", r.r_h},
            {"r_o", r.r_o},
            {"r_v", r.r_v},
            {"r_l", r.r_l},
            {"r_tr", r.r_tr},
            {"style_parts", r.style_parts},
            {"r_st", r.r_st},
            {"energy", r.energy},
            {"total", r.total}}}};
}

json to_json(const MetricsFrame& m) {
  return {{"frames", m.frames},       {"fps", m.fps}, {"mean_r_tr", m.mean_r_tr},
          {"mean_total", m.mean_total}, {"falls", m.falls}};
}

json to_json(const ErrorBody& e) { return {{"code", e.code}, {"message", e.message}}; }
json to_json(const Bye& b) { return {{"reason", b.reason}}; }

Hello hello_from_json(const json& j) {
  return decode("hello", [&] {
    Hello h;
    h.role = j.at("role").get<std::string>();
    h.skeleton = j.value("skeleton", "");
    h.joint_count = j.value("joint_count", 0);
    h.fps = j.value("fps", 30.0);
    return h;
  });
}

DirectiveUpdate directive_update_from_json(const json& j) {
  return decode("directive_update", [&] {
    DirectiveUpdate d;
    if (j.contains("command")) {
      const auto& c = j.at("command");
      RootCommand cmd;
      cmd.speed = finite(c, "speed");
      cmd.heading = c.contains("heading") ? finite(c, "heading") : 0.0;
      cmd.facing = c.contains("facing") ? finite(c, "facing") : cmd.heading;
      cmd.height = c.contains("height") ? finite(c, "height") : cmd.height;
      d.command = cmd;
    }
    if (j.contains("directive")) d.directive = j.at("directive");
    if (!d.command && d.directive.is_null()) throw ProtocolError("directive_update needs a command or a directive");
    return d;
  });
}

StateFrame state_frame_from_json(const json& j) {
  return decode("state_frame", [&] {
    StateFrame s;
    s.frame = j.at("frame").get<std::int64_t>();
    s.sim_time = j.at("sim_time").get<double>();
    s.pose = pose_from_json(j.at("pose"));
    s.fallen = j.at("fallen").get<bool>();
    const auto& r = j.at("reward");
    s.reward.r_h = r.at("r_h").get<double>();
    s.reward.r_o = r.at("r_o").get<double>();
    s.reward.r_v = r.at("r_v").get<double>();
    s.reward.r_l = r.at("r_l").get<double>();
    s.reward.r_tr = r.at("r_tr").get<double>();
    s.reward.style_parts = r.at("style_parts").get<std::array<double, 5>>();
    s.reward.r_st = r.at("r_st").get<double>();
    s.reward.energy = r.at("energy").get<double>();
    s.reward.total = r.at("total").get<double>();
    return s;
  });
}

MetricsFrame metrics_frame_from_json(const json& j) {
  return decode("metrics_frame", [&] {
    MetricsFrame m;
    m.frames = j.at("frames").get<std::int64_t>();
    m.fps = j.at("fps").get<double>();
    m.mean_r_tr = j.at("mean_r_tr").get<double>();
    m.mean_total = j.at("mean_total").get<double>();
    m.falls = j.at("falls").get<int>();
    return m;
  });
}

ErrorBody error_from_json(const json& j) {
  return decode("error", [&] { return ErrorBody{j.at("code").get<std::string>(), j.value("message", "")}; });
}

Bye bye_from_json(const json& j) {
  return decode("bye", [&] { return Bye{j.value("reason", "")}; });
}

}  // namespace mhc::server
