#pragma once

#include "mhc/types.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace mhc::motion {

enum class PartLabel { kUpperRight, kUpperLeft, kRootGroup, kLower };

/// The five body-part sets used by the style discriminators.
enum class BodyPart { kUpperRight = 0, kUpperLeft = 1, kRoot = 2, kLower = 3, kFullBody = 4 };
inline constexpr int kNumBodyParts = 5;

struct JointDef {
  std::string name;
  int parent = -1;
  Vec3 offset = Vec3::Zero();
  PartLabel label = PartLabel::kRootGroup;
  /// Maximum exponential-map magnitude accepted as a joint set point (rad).
  double limit = 2.8;
};

/// Topologically ordered joint tree. Entry 0 is the root (pelvis); its
/// rotation and position live in the root channel of a Pose. Every per-joint
/// pose channel is indexed by *channel index* c = skeleton index - 1, so a
/// skeleton with n entries has joint_count() == n - 1.
class SkeletonSpec {
 public:
  SkeletonSpec() = default;
  SkeletonSpec(std::string name, std::vector<JointDef> joints);

  const std::string& name() const { return name_; }
  const std::vector<JointDef>& joints() const { return joints_; }

  int joint_count() const { return static_cast<int>(joints_.size()) - 1; }
  const JointDef& channel_joint(int channel) const { return joints_[channel + 1]; }

  /// Channel index of a named non-root joint, or -1.
  int channel_of(std::string_view joint_name) const;

  /// Channel indices of each part set J1..J5. The root set (J3) lists the
  /// non-root joints labelled kRootGroup (torso/head); its root-channel
  /// features are added by the feature extractors.
  const std::vector<int>& part_channels(BodyPart part) const {
    return parts_[static_cast<int>(part)];
  }

  /// Upper body used for upper/lower recombination: both arms plus the
  /// root-group joints (torso, head). Lower body is the complement.
  std::vector<bool> upper_body_mask() const;

  /// Channels whose label is kLower and that have no children.
  const std::vector<int>& foot_channels() const { return feet_; }

  /// Throws InvalidSkeleton on a malformed tree.
  void validate() const;

 private:
  void index();

  std::string name_;
  std::vector<JointDef> joints_;
  std::array<std::vector<int>, kNumBodyParts> parts_;
  std::vector<int> feet_;
};

/// Default desk-scale humanoid: pelvis root + 14 joints, 1.6 m tall with the
/// pelvis at 0.9 m and the feet on the ground in the identity pose.
SkeletonSpec sim13();

std::string_view to_string(PartLabel label);
PartLabel part_label_from_string(std::string_view s);

}  // namespace mhc::motion
