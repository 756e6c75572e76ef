#pragma once

#include "mhc/directive/directive.hpp"

namespace mhc::directive {

/// Observation = [pose block | target block]. The pose block is the current
/// pose in its heading frame; the target block holds, for lookahead offsets
/// 1 and H, the masked target features followed by the mask bits.
struct ObservationLayout {
  int joint_count = 0;

  static constexpr int kRootTargetDim = 16;  // pos 3, dh 1, rot 6, dv 3, dw 3
  static constexpr int kLookaheads = 2;

  int pose_dim() const { return 13 + 9 * joint_count; }
  int mask_bits() const { return kNumChannels + 1 + kNumRootFields + joint_count; }
  int target_features() const { return kRootTargetDim + 12 * joint_count; }
  int per_offset() const { return target_features() + mask_bits(); }
  int target_dim() const { return kLookaheads * per_offset(); }
  int total() const { return pose_dim() + target_dim(); }
};

/// Heading-canonicalized current pose only.
VecX encode_pose(const Pose& current);

/// Targets at t+1 and t+H, padded with the last directive frame.
VecX encode_observation(const Pose& current, const Directive& directive, int t);

/// Mask bits: channels, root position, root fields, joints.
VecX mask_bits(const DirectiveMask& mask);

}  // namespace mhc::directive
