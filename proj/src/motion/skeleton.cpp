#include "mhc/motion/skeleton.hpp"

#include "mhc/errors.hpp"

#include <set>

namespace mhc::motion {

SkeletonSpec::SkeletonSpec(std::string name, std::vector<JointDef> joints)
    : name_(std::move(name)), joints_(std::move(joints)) {
  validate();
  index();
}

void SkeletonSpec::validate() const {
  if (joints_.size() < 2) throw InvalidSkeleton("skeleton needs a root and at least one joint");
  if (joints_[0].parent != -1) throw InvalidSkeleton("joint 0 must be the root");
  std::set<std::string> names;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& j = joints_[i];
    if (!names.insert(j.name).second) throw InvalidSkeleton("duplicate joint name: " + j.name);
    if (i > 0 && (j.parent < 0 || j.parent >= static_cast<int>(i)))
      throw InvalidSkeleton("joint " + j.name + " is not topologically ordered");
    if (!j.offset.allFinite()) throw InvalidSkeleton("joint " + j.name + " has a non-finite offset");
    if (!(j.limit > 0.0)) throw InvalidSkeleton("joint " + j.name + " has a non-positive limit");
  }
}

void SkeletonSpec::index() {
  for (auto& p : parts_) p.clear();
  feet_.clear();
  std::vector<int> child_count(joints_.size(), 0);
  for (std::size_t i = 1; i < joints_.size(); ++i) ++child_count[joints_[i].parent];

  for (int c = 0; c < joint_count(); ++c) {
    const auto& j = channel_joint(c);
    switch (j.label) {
      case PartLabel::kUpperRight: parts_[0].push_back(c); break;
      case PartLabel::kUpperLeft: parts_[1].push_back(c); break;
      case PartLabel::kRootGroup: parts_[2].push_back(c); break;
      case PartLabel::kLower: parts_[3].push_back(c); break;
    }
    parts_[4].push_back(c);
    if (j.label == PartLabel::kLower && child_count[c + 1] == 0) feet_.push_back(c);
  }
}

int SkeletonSpec::channel_of(std::string_view joint_name) const {
  for (int c = 0; c < joint_count(); ++c)
    if (channel_joint(c).name == joint_name) return c;
  return -1;
}

std::vector<bool> SkeletonSpec::upper_body_mask() const {
  std::vector<bool> upper(joint_count(), false);
  for (int c = 0; c < joint_count(); ++c) upper[c] = channel_joint(c).label != PartLabel::kLower;
  return upper;
}

SkeletonSpec sim13() {
  using L = PartLabel;
  std::vector<JointDef> j = {
      {"pelvis", -1, Vec3(0, 0, 0), L::kRootGroup, 2.8},
      {"torso", 0, Vec3(0, 0, 0.25), L::kRootGroup, 1.2},
      {"head", 1, Vec3(0, 0, 0.45), L::kRootGroup, 1.0},
      {"right_shoulder", 1, Vec3(0, -0.18, 0.25), L::kUpperRight, 2.8},
      {"right_elbow", 3, Vec3(0, 0, -0.28), L::kUpperRight, 2.6},
      {"right_hand", 4, Vec3(0, 0, -0.25), L::kUpperRight, 1.2},
      {"left_shoulder", 1, Vec3(0, 0.18, 0.25), L::kUpperLeft, 2.8},
      {"left_elbow", 6, Vec3(0, 0, -0.28), L::kUpperLeft, 2.6},
      {"left_hand", 7, Vec3(0, 0, -0.25), L::kUpperLeft, 1.2},
      {"right_hip", 0, Vec3(0, -0.1, -0.05), L::kLower, 2.2},
      {"right_knee", 9, Vec3(0, 0, -0.42), L::kLower, 2.6},
      {"right_foot", 10, Vec3(0, 0, -0.43), L::kLower, 1.0},
      {"left_hip", 0, Vec3(0, 0.1, -0.05), L::kLower, 2.2},
      {"left_knee", 12, Vec3(0, 0, -0.42), L::kLower, 2.6},
      {"left_foot", 13, Vec3(0, 0, -0.43), L::kLower, 1.0},
  };
  return SkeletonSpec("sim13", std::move(j));
}

std::string_view to_string(PartLabel label) {
  switch (label) {
    case PartLabel::kUpperRight: return "UPPER_RIGHT";
    case PartLabel::kUpperLeft: return "UPPER_LEFT";
    case PartLabel::kRootGroup: return "ROOT_GROUP";
    case PartLabel::kLower: return "LOWER";
  }
  return "ROOT_GROUP";
}

PartLabel part_label_from_string(std::string_view s) {
  if (s == "UPPER_RIGHT") return PartLabel::kUpperRight;
  if (s == "UPPER_LEFT") return PartLabel::kUpperLeft;
  if (s == "ROOT_GROUP") return PartLabel::kRootGroup;
  if (s == "LOWER") return PartLabel::kLower;
  throw SchemaError("unknown part label: " + std::string(s));
}

}  // namespace mhc::motion
