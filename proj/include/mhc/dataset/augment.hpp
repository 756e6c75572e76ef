#pragma once

#include "mhc/dataset/dataset.hpp"
#include "mhc/sim/sim.hpp"

#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace mhc::dataset {

struct AugmentSpec {
  /// Per-channel flag: true for upper-body joints. Empty means the
  /// skeleton's default split (arms plus torso/head).
  std::vector<bool> upper_joints;
  bool enable_combinations = true;
  double rotation_range = 2.0 * std::numbers::pi;
  int combo_length = 240;

  /// Resolves the default split and checks upper/lower partition the joints.
  std::vector<bool> resolve_upper(const SkeletonSpec& skel) const;
};

/// Root and lower-body rotations from `lower_src`, upper-body rotations from
/// `upper_src`, frame-by-frame from the given start offsets; positions are
/// recomputed by FK. Throws ClipTooShort.
MotionClip combine_upper_lower(const SkeletonSpec& skel, const MotionClip& lower_src,
                               const MotionClip& upper_src, int length,
                               const std::vector<bool>& upper_joints, int lower_start = 0,
                               int upper_start = 0);

/// M+ = M plus `n_combos` sampled upper/lower combinations (uniform clip
/// pairs, uniform start offsets). Deterministic in `seed`.
MotionDataset build_mplus(const MotionDataset& ds, const AugmentSpec& spec, int n_combos,
                          std::uint64_t seed);

struct InitialPose {
  Pose pose;
  bool fallen = false;
  double yaw = 0.0;
};

/// Mixture of uniform M+ poses and fallen poses (weight p_fall), each turned
/// by a uniform random yaw about its own root. Throws EmptyBank.
InitialPose sample_initial_pose(const MotionDataset& mplus, const std::vector<Pose>& fall_bank,
                                double p_fall, std::mt19937_64& rng);

/// Drops the character from randomized M+ poses with a random lean and
/// records its rest pose after `settle_seconds` of holding its joints.
std::vector<Pose> generate_fall_bank(const MotionDataset& mplus, const sim::Simulator& sim, int count,
                                     std::uint64_t seed, double settle_seconds = 2.0);

}  // namespace mhc::dataset
