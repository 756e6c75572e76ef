#include "mhc/motion/pose.hpp"

#include "mhc/errors.hpp"

namespace mhc::motion {

Pose rest_pose(int joint_count, double root_height) {
  Pose p;
  p.root.position = Vec3(0, 0, root_height);
  p.joint_rot.assign(joint_count, identity_sixd());
  return p;
}

std::string to_string(ClipSource s) {
  switch (s) {
    case ClipSource::kRaw: return "raw";
    case ClipSource::kCombined: return "combined";
    case ClipSource::kGenerated: return "generated";
  }
  return "raw";
}

ClipSource clip_source_from_string(const std::string& s) {
  if (s == "raw") return ClipSource::kRaw;
  if (s == "combined") return ClipSource::kCombined;
  if (s == "generated") return ClipSource::kGenerated;
  throw SchemaError("unknown clip source: " + s);
}

}  // namespace mhc::motion
