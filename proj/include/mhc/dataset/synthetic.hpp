#pragma once

#include "mhc/dataset/dataset.hpp"

#include <string>
#include <vector>

namespace mhc::dataset {

enum class SyntheticMotion { kWalk, kRun, kWave, kIdleSway, kCrouchWalk, kArmRaise };

std::string to_string(SyntheticMotion m);

/// Procedural clip on the sim13 skeleton: parametric joint-angle curves with
/// the root placed by the planted-foot model (lowest point on the ground,
/// stance feet do not slide). Root velocities are finite differences.
MotionClip synthesize_clip(const SkeletonSpec& skel, SyntheticMotion motion, int frames = 300,
                           double fps = 30.0);

/// First `count` motions of the fixed order walk, run, wave, idle sway,
/// crouch walk, arm raise (count in [1, 6]).
MotionDataset synthetic_dataset(const SkeletonSpec& skel, int count, int frames = 300);

/// Root trajectory for a sequence of joint rotations (exponential maps per
/// frame), shared by the synthetic clips and tests. Returns one pose per
/// entry of `joint_expmaps` with positions refreshed by FK.
std::vector<Pose> place_root_kinematically(const SkeletonSpec& skel,
                                           const std::vector<std::vector<Vec3>>& joint_expmaps,
                                           double fps);

}  // namespace mhc::dataset
