#include "mhc/server/convert.hpp"

#include "mhc/directive/joystick.hpp"
#include "mhc/errors.hpp"
#include "mhc/motion/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mhc::server {

using directive::Channel;
using directive::Directive;
using motion::Pose;
using nlohmann::json;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Directive keypoints_to_directive(const json& j, const motion::SkeletonSpec& skel,
                                 const std::vector<std::string>& occluded, int horizon) {
  motion::expect_schema(j, kKeypointSchema);
  const int J = skel.joint_count();
  for (const auto& name : occluded)
    if (skel.channel_of(name) < 0) throw SchemaError("occluded: unknown joint '" + name + "'");
  if (!j.contains("frames") || !j.at("frames").is_array() || j.at("frames").empty())
    throw SchemaError("frames: expected a non-empty array");
  const auto& frames = j.at("frames");

  Directive d;
  d.horizon = horizon;
  d.fps = j.value("fps", 30.0);
  d.mask.channels[static_cast<int>(Channel::kGlobal)] = true;
  d.mask.joint_mask.assign(J, true);
  for (const auto& name : occluded) d.mask.joint_mask[skel.channel_of(name)] = false;

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& fr = frames[t];
    const std::string where = "frames[" + std::to_string(t) + "]";
    if (!fr.is_object()) throw SchemaError(where + ": expected an object of joint positions");
    for (const auto& [name, v] : fr.items())
      if (skel.channel_of(name) < 0) throw SchemaError(where + "." + name + ": unknown joint");
    Pose p = motion::rest_pose(J, 0.0);
    p.joint_local.assign(J, Vec3::Zero());
    p.joint_global.assign(J, Vec3::Zero());
    for (int c = 0; c < J; ++c) {
      const std::string& name = skel.channel_joint(c).name;
      if (!fr.contains(name) || fr.at(name).is_null()) {
        d.mask.joint_mask[c] = false;
        continue;
      }
      try {
        p.joint_global[c] = motion::vec3_from_json(fr.at(name), name.c_str());
      } catch (const Error& e) {
        throw SchemaError(where + "." + name + ": " + e.what());
      }
    }
    d.frames.push_back(std::move(p));
  }
  if (std::none_of(d.mask.joint_mask.begin(), d.mask.joint_mask.end(), [](bool b) { return b; }))
    throw SchemaError("keypoints: every joint is occluded in some frame");
  try {
    d.validate(J);
  } catch (const InvalidDirective& e) {
    throw SchemaError(std::string("keypoints: ") + e.what());
  }
  return d;
}

Directive root_commands_to_directive(const std::string& csv, int joint_count, int horizon, double fps) {
  std::istringstream in(csv);
  std::string line;
  int lineno = 0;
  int col_speed = -1, col_heading = -1, col_height = -1, col_facing = -1;
  std::size_t width = 0;
  std::vector<directive::RootCommand> cmds;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (width == 0) {
      width = cells.size();
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "speed") col_speed = static_cast<int>(i);
        else if (cells[i] == "heading") col_heading = static_cast<int>(i);
        else if (cells[i] == "height") col_height = static_cast<int>(i);
        else if (cells[i] == "facing") col_facing = static_cast<int>(i);
      }
      if (col_speed < 0 || col_heading < 0 || col_height < 0)
        throw SchemaError("line " + std::to_string(lineno) + ": header must name speed, heading and height");
      continue;
    }
    if (cells.size() != width)
      throw SchemaError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields, got " +
                        std::to_string(cells.size()));
    auto number = [&](int col, const char* field) {
      const std::string& s = cells[col];
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (s.empty() || used != s.size() || !std::isfinite(v))
        throw SchemaError("line " + std::to_string(lineno) + ", field " + field + ": not a finite number: '" + s +
                          "'");
      return v;
    };
    directive::RootCommand c;
    c.speed = number(col_speed, "speed");
    c.heading = number(col_heading, "heading");
    c.height = number(col_height, "height");
    c.facing = col_facing >= 0 ? number(col_facing, "facing") : c.heading;
    if (c.speed < 0.0) throw SchemaError("line " + std::to_string(lineno) + ", field speed: must be >= 0");
    if (c.height <= 0.0) throw SchemaError("line " + std::to_string(lineno) + ", field height: must be > 0");
    cmds.push_back(c);
  }
  if (width == 0) throw SchemaError("line 1: missing header");
  if (cmds.empty()) throw SchemaError("line " + std::to_string(lineno) + ": no command rows");
  Directive d = directive::joystick_directive(cmds, joint_count, horizon, fps);
  d.validate(joint_count);
  return d;
}

Directive clip_to_directive(const motion::MotionClip& clip, int horizon) {
  if (clip.frames.empty()) throw InvalidClip("clip '" + clip.name + "' has no frames");
  const int J = clip.frames.front().joint_count();
  Directive d;
  d.frames = clip.frames;
  d.horizon = horizon;
  d.fps = clip.fps;
  d.mask.channels[static_cast<int>(Channel::kRoot)] = true;
  d.mask.channels[static_cast<int>(Channel::kTheta)] = true;
  d.mask.channels[static_cast<int>(Channel::kLocal)] = true;
  d.mask.joint_mask.assign(J, true);
  d.validate(J);
  return d;
}

Directive load_keypoints(const std::filesystem::path& path, const motion::SkeletonSpec& skel,
                         const std::vector<std::string>& occluded, int horizon) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  try {
    return keypoints_to_directive(j, skel, occluded, horizon);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

Directive load_root_commands(const std::filesystem::path& path, int joint_count, int horizon, double fps) {
  try {
    return root_commands_to_directive(read_text(path), joint_count, horizon, fps);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace mhc::server
