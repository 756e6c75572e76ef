#pragma once

#include "mhc/motion/pose.hpp"
#include "mhc/motion/skeleton.hpp"

namespace mhc::motion {

/// Rotates every world-frame quantity of a pose by `yaw` about the vertical
/// axis through `pivot`. q^theta, q^l and heights are untouched.
Pose rotate_pose_inplane(const Pose& pose, double yaw, const Vec2& pivot);

/// Clip version of rotate_pose_inplane; yaw == 0 returns an exact copy.
MotionClip apply_inplane_rotation(const MotionClip& clip, double yaw, const Vec2& pivot);

/// Shifts all world positions of a pose by `delta`.
Pose translate_pose(const Pose& pose, const Vec3& delta);

/// Sets root linear/angular velocities from central finite differences of
/// the root trajectory (one-sided at the ends).
void recompute_root_velocities(MotionClip& clip);

struct ClipTolerances {
  double fk = 1e-4;         // m
  double velocity = 0.02;   // m/s
};

/// Throws InvalidClip when the clip violates its invariants. Missing
/// position channels are recomputed by FK before checking.
void validate_clip(const SkeletonSpec& skel, MotionClip& clip, const ClipTolerances& tol = {});

}  // namespace mhc::motion
