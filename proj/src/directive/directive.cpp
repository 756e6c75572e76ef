#include "mhc/directive/directive.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/io.hpp"

#include <algorithm>

namespace mhc::directive {

using nlohmann::json;

bool DirectiveMask::root_field(RootField f) const {
  if (!has(Channel::kRoot)) return false;
  return root_fields.empty() || std::find(root_fields.begin(), root_fields.end(), f) != root_fields.end();
}

int DirectiveMask::selected_joint_count() const {
  if (!position_channel()) return 0;
  return static_cast<int>(std::count(joint_mask.begin(), joint_mask.end(), true));
}

bool DirectiveMask::any_selected() const {
  return has(Channel::kRoot) || has(Channel::kTheta) || selected_joint_count() > 0;
}

void DirectiveMask::validate(int joint_count) const {
  if (static_cast<int>(joint_mask.size()) != joint_count)
    throw InvalidDirective("joint mask length does not match the joint count");
  if (!position_channel() && std::count(joint_mask.begin(), joint_mask.end(), true) != 0)
    throw InvalidDirective("joint mask must be empty when no position channel is selected");
  if (!has(Channel::kRoot) && !root_fields.empty())
    throw InvalidDirective("root fields given without the root channel");
  if (!any_selected()) throw InvalidDirective("directive mask selects nothing");
}

std::string DirectiveMask::describe() const {
  std::string out;
  auto add = [&](const std::string& s) {
    if (!out.empty()) out += "+";
    out += s;
  };
  if (has(Channel::kRoot)) {
    std::string r = "R";
    if (!root_fields.empty()) {
      r += "{";
      for (std::size_t i = 0; i < root_fields.size(); ++i) r += (i ? "," : "") + to_string(root_fields[i]);
      r += "}";
    }
    add(r);
  }
  if (has(Channel::kTheta)) add("THETA");
  const int j = static_cast<int>(joint_mask.size());
  const int sel = selected_joint_count();
  const std::string suffix = sel == j ? "" : "[" + std::to_string(sel) + "/" + std::to_string(j) + "]";
  if (has(Channel::kLocal)) add("L" + suffix);
  if (has(Channel::kGlobal)) add("G" + suffix);
  return out;
}

const Pose& Directive::at(int t) const {
  if (frames.empty()) throw InvalidDirective("directive has no frames");
  return frames[std::clamp(t, 0, length() - 1)];
}

void Directive::validate(int joint_count) const {
  if (frames.empty()) throw InvalidDirective("directive has no frames");
  if (horizon < 1) throw InvalidDirective("directive horizon must be positive");
  mask.validate(joint_count);
  for (const auto& f : frames)
    if (f.joint_count() != joint_count || static_cast<int>(f.joint_local.size()) != joint_count ||
        static_cast<int>(f.joint_global.size()) != joint_count)
      throw InvalidDirective("directive frame does not match the joint count");
}

std::string to_string(Channel c) {
  switch (c) {
    case Channel::kRoot: return "R";
    case Channel::kTheta: return "THETA";
    case Channel::kLocal: return "L";
    case Channel::kGlobal: return "G";
  }
  return "R";
}

Channel channel_from_string(const std::string& s) {
  if (s == "R") return Channel::kRoot;
  if (s == "THETA") return Channel::kTheta;
  if (s == "L") return Channel::kLocal;
  if (s == "G") return Channel::kGlobal;
  throw SchemaError("unknown channel: " + s);
}

std::string to_string(RootField f) {
  switch (f) {
    case RootField::kHeight: return "height";
    case RootField::kOrientation: return "orientation";
    case RootField::kVelocity: return "velocity";
  }
  return "height";
}

RootField root_field_from_string(const std::string& s) {
  if (s == "height") return RootField::kHeight;
  if (s == "orientation") return RootField::kOrientation;
  if (s == "velocity") return RootField::kVelocity;
  throw SchemaError("unknown root field: " + s);
}

json to_json(const DirectiveMask& mask) {
  json ch = json::array();
  for (int c = 0; c < kNumChannels; ++c)
    if (mask.channels[c]) ch.push_back(to_string(static_cast<Channel>(c)));
  json rf = json::array();
  for (auto f : mask.root_fields) rf.push_back(to_string(f));
  json jm = json::array();
  for (bool b : mask.joint_mask) jm.push_back(b);
  return {{"channels", ch}, {"joint_mask", jm}, {"root_fields", rf}};
}

DirectiveMask mask_from_json(const json& j, int joint_count) {
  DirectiveMask m;
  try {
    for (const auto& c : j.at("channels")) m.channels[static_cast<int>(channel_from_string(c.get<std::string>()))] = true;
    if (j.contains("root_fields"))
      for (const auto& f : j["root_fields"]) m.root_fields.push_back(root_field_from_string(f.get<std::string>()));
    if (j.contains("joint_mask")) {
      for (const auto& b : j["joint_mask"]) m.joint_mask.push_back(b.get<bool>());
    } else {
      m.joint_mask.assign(joint_count, m.position_channel());
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("directive mask: ") + e.what());
  }
  try {
    m.validate(joint_count);
  } catch (const InvalidDirective& e) {
    throw SchemaError(std::string("directive mask: ") + e.what());
  }
  return m;
}

json to_json(const Directive& d) {
  using motion::to_json;
  const auto& m = d.mask;
  json frames = json::array();
  for (const auto& f : d.frames) {
    json fr = json::object();
    if (m.has(Channel::kRoot)) {
      json root = json::object();
      if (m.root_full()) root["pos"] = to_json(f.root.position);
      else if (m.root_field(RootField::kHeight)) root["height"] = f.root.position.z();
      if (m.root_field(RootField::kOrientation)) root["rot6d"] = to_json(f.root.orientation);
      if (m.root_field(RootField::kVelocity)) {
        root["lin_vel"] = to_json(f.root.linear_velocity);
        root["ang_vel"] = to_json(f.root.angular_velocity);
      }
      fr["root"] = root;
    }
    if (m.has(Channel::kTheta)) {
      json a = json::array();
      for (const auto& r : f.joint_rot) a.push_back(to_json(r));
      fr["joint_rot6d"] = a;
    }
    auto positions = [&](const std::vector<Vec3>& v) {
      json a = json::array();
      for (std::size_t c = 0; c < v.size(); ++c) a.push_back(m.joint_mask[c] ? to_json(v[c]) : json(nullptr));
      return a;
    };
    if (m.has(Channel::kLocal)) fr["joint_local_pos"] = positions(f.joint_local);
    if (m.has(Channel::kGlobal)) fr["joint_global_pos"] = positions(f.joint_global);
    frames.push_back(std::move(fr));
  }
  return {{"schema", kDirectiveSchema}, {"horizon", d.horizon}, {"fps", d.fps},
          {"mask", to_json(d.mask)}, {"frames", frames}};
}

Directive directive_from_json(const json& j, int joint_count) {
  motion::expect_schema(j, kDirectiveSchema);
  Directive d;
  try {
    d.horizon = j.value("horizon", 10);
    d.fps = j.value("fps", 30.0);
    d.mask = mask_from_json(j.at("mask"), joint_count);
    const auto& frames = j.at("frames");
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto& fr = frames[t];
      const std::string where = "frame " + std::to_string(t);
      Pose p = motion::rest_pose(joint_count, 0.0);
      p.joint_local.assign(joint_count, Vec3::Zero());
      p.joint_global.assign(joint_count, Vec3::Zero());
      if (fr.contains("root")) {
        const auto& r = fr["root"];
        if (r.contains("pos")) p.root.position = motion::vec3_from_json(r["pos"], "root.pos");
        if (r.contains("height")) p.root.position.z() = r["height"].get<double>();
        if (r.contains("rot6d")) p.root.orientation = motion::rot6_from_json(r["rot6d"], "root.rot6d");
        if (r.contains("lin_vel")) p.root.linear_velocity = motion::vec3_from_json(r["lin_vel"], "root.lin_vel");
        if (r.contains("ang_vel")) p.root.angular_velocity = motion::vec3_from_json(r["ang_vel"], "root.ang_vel");
      }
      auto read_positions = [&](const char* key, std::vector<Vec3>& out) {
        if (!fr.contains(key)) return;
        const auto& a = fr[key];
        if (!a.is_array() || static_cast<int>(a.size()) != joint_count)
          throw SchemaError(where + ": " + key + " must list every joint");
        for (int c = 0; c < joint_count; ++c)
          if (!a[c].is_null()) out[c] = motion::vec3_from_json(a[c], key);
      };
      if (fr.contains("joint_rot6d")) {
        const auto& a = fr["joint_rot6d"];
        if (!a.is_array() || static_cast<int>(a.size()) != joint_count)
          throw SchemaError(where + ": joint_rot6d must list every joint");
        for (int c = 0; c < joint_count; ++c) p.joint_rot[c] = motion::rot6_from_json(a[c], "joint_rot6d");
      }
      read_positions("joint_local_pos", p.joint_local);
      read_positions("joint_global_pos", p.joint_global);
      d.frames.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("directive: ") + e.what());
  }
  try {
    d.validate(joint_count);
  } catch (const InvalidDirective& e) {
    throw SchemaError(std::string("directive: ") + e.what());
  }
  return d;
}

Directive load_directive(const std::filesystem::path& path, int joint_count) {
  return directive_from_json(motion::read_json_file(path), joint_count);
}

void save_directive(const Directive& d, const std::filesystem::path& path) {
  motion::write_json_file(to_json(d), path);
}

}  // namespace mhc::directive
