#pragma once

#include "mhc/motion/pose.hpp"
#include "mhc/motion/skeleton.hpp"

#include <span>

namespace mhc::motion {

struct FkResult {
  std::vector<Vec3> global;     // q^g
  std::vector<Vec3> local;      // q^l
  std::vector<Mat3> global_rot; // world orientation of each joint frame
};

/// Forward kinematics from the root transform and local joint rotations.
/// Joint i sits at parent_position + parent_rotation * offset_i; its own
/// rotation only affects its descendants.
FkResult forward_kinematics(const SkeletonSpec& skel, const Vec3& root_position,
                            const Mat3& root_rotation, std::span<const Mat3> local_rotations);

/// 6D overload; propagates DegenerateRotation.
FkResult forward_kinematics(const SkeletonSpec& skel, const RootState& root,
                            std::span<const Rot6> joint_rot);

/// Overwrites q^l and q^g of a pose from its root and joint rotations.
void refresh_positions(const SkeletonSpec& skel, Pose& pose);

/// Largest deviation (m) between stored and recomputed q^l/q^g.
double fk_consistency_error(const SkeletonSpec& skel, const Pose& pose);

/// Mean of the joint global positions together with the root, used as a
/// crude centre of mass.
Vec3 centre_of_mass(const Vec3& root_position, std::span<const Vec3> joint_global);

}  // namespace mhc::motion
