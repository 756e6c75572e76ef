#include "cli_common.hpp"

#include "mhc/dataset/synthetic.hpp"
#include "mhc/motion/io.hpp"
#include "mhc/motion/kinematics.hpp"
#include "mhc/util/seed.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace mhc::cli {

std::uint64_t resolve_seed(std::uint64_t configured, const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const auto env = seed_override()) return *env;
  return configured;
}

motion::SkeletonSpec skeleton_or_default(const std::string& path) {
  return path.empty() ? motion::sim13() : motion::load_skeleton(path);
}

dataset::MotionDataset dataset_or_synthetic(const std::string& dir, const motion::SkeletonSpec& skel, int clips,
                                            int frames) {
  if (!dir.empty()) return dataset::load_dataset(dir);
  return dataset::synthetic_dataset(skel, clips, frames);
}

Vec2 parse_xy(const std::string& s) {
  const auto comma = s.find(',');
  auto number = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size() || !std::isfinite(v)) throw UsageError("expected x,y but got '" + s + "'");
    return v;
  };
  if (comma == std::string::npos) throw UsageError("expected x,y but got '" + s + "'");
  return Vec2(number(s.substr(0, comma)), number(s.substr(comma + 1)));
}

nlohmann::json merge_config(nlohmann::json base, const std::string& path) {
  if (!path.empty()) base.merge_patch(motion::read_json_file(path));
  return base;
}

motion::Pose standing_pose(const motion::SkeletonSpec& skel) {
  motion::Pose p = motion::rest_pose(skel.joint_count(), 0.0);
  motion::refresh_positions(skel, p);
  double lowest = 0.0;
  for (const auto& g : p.joint_global) lowest = std::min(lowest, g.z());
  p.root.position.z() = -lowest;
  motion::refresh_positions(skel, p);
  return p;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump() << std::endl; }

}  // namespace mhc::cli
