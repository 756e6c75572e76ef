#pragma once

#include "mhc/motion/rotation.hpp"
#include "mhc/types.hpp"

#include <string>
#include <vector>

namespace mhc::motion {

/// Root channel q^r.
struct RootState {
  Vec3 position = Vec3::Zero();
  Rot6 orientation = identity_sixd();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();

  Mat3 rotation() const { return sixd_to_matrix(orientation); }
};

/// One frame of humanoid state. Per-joint channels are indexed by channel
/// index (see SkeletonSpec) and hold J entries.
struct Pose {
  RootState root;
  std::vector<Rot6> joint_rot;     // q^theta, local joint rotations
  std::vector<Vec3> joint_local;   // q^l, positions in the root frame
  std::vector<Vec3> joint_global;  // q^g, world positions

  double height() const { return root.position.z(); }
  int joint_count() const { return static_cast<int>(joint_rot.size()); }
};

/// Identity joint rotations with positions left empty.
Pose rest_pose(int joint_count, double root_height);

enum class ClipSource { kRaw, kCombined, kGenerated };

std::string to_string(ClipSource s);
ClipSource clip_source_from_string(const std::string& s);

struct MotionClip {
  std::string name;
  double fps = 30.0;
  std::string skeleton;
  std::vector<Pose> frames;
  ClipSource source = ClipSource::kRaw;

  int length() const { return static_cast<int>(frames.size()); }
};

}  // namespace mhc::motion
