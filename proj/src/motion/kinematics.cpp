#include "mhc/motion/kinematics.hpp"

#include "mhc/errors.hpp"

namespace mhc::motion {

FkResult forward_kinematics(const SkeletonSpec& skel, const Vec3& root_position,
                            const Mat3& root_rotation, std::span<const Mat3> local_rotations) {
  const int n = skel.joint_count();
  if (static_cast<int>(local_rotations.size()) != n)
    throw ShapeMismatch("forward_kinematics: rotation count does not match skeleton");

  const auto& joints = skel.joints();
  std::vector<Vec3> pos(n + 1);
  std::vector<Mat3> rot(n + 1);
  pos[0] = root_position;
  rot[0] = root_rotation;
  for (int i = 1; i <= n; ++i) {
    const int p = joints[i].parent;
    pos[i] = pos[p] + rot[p] * joints[i].offset;
    rot[i] = rot[p] * local_rotations[i - 1];
  }

  FkResult out;
  out.global.assign(pos.begin() + 1, pos.end());
  out.global_rot.assign(rot.begin() + 1, rot.end());
  out.local.resize(n);
  const Mat3 inv = root_rotation.transpose();
  for (int c = 0; c < n; ++c) out.local[c] = inv * (out.global[c] - root_position);
  return out;
}

FkResult forward_kinematics(const SkeletonSpec& skel, const RootState& root,
                            std::span<const Rot6> joint_rot) {
  std::vector<Mat3> mats;
  mats.reserve(joint_rot.size());
  for (const auto& r : joint_rot) mats.push_back(sixd_to_matrix(r));
  return forward_kinematics(skel, root.position, root.rotation(), mats);
}

void refresh_positions(const SkeletonSpec& skel, Pose& pose) {
  auto fk = forward_kinematics(skel, pose.root, pose.joint_rot);
  pose.joint_global = std::move(fk.global);
  pose.joint_local = std::move(fk.local);
}

double fk_consistency_error(const SkeletonSpec& skel, const Pose& pose) {
  const auto fk = forward_kinematics(skel, pose.root, pose.joint_rot);
  if (pose.joint_global.size() != fk.global.size() || pose.joint_local.size() != fk.local.size())
    throw ShapeMismatch("pose position channels do not match skeleton");
  double worst = 0.0;
  for (std::size_t c = 0; c < fk.global.size(); ++c) {
    worst = std::max(worst, (fk.global[c] - pose.joint_global[c]).norm());
    worst = std::max(worst, (fk.local[c] - pose.joint_local[c]).norm());
  }
  return worst;
}

Vec3 centre_of_mass(const Vec3& root_position, std::span<const Vec3> joint_global) {
  Vec3 sum = root_position;
  for (const auto& g : joint_global) sum += g;
  return sum / static_cast<double>(joint_global.size() + 1);
}

}  // namespace mhc::motion
