#pragma once

#include "mhc/motion/pose.hpp"
#include "mhc/motion/skeleton.hpp"

#include <filesystem>
#include <vector>

namespace mhc::dataset {

using motion::MotionClip;
using motion::Pose;
using motion::SkeletonSpec;

struct FrameRef {
  int clip = 0;
  int frame = 0;
};

/// Clips sharing one skeleton plus a flat frame index for uniform pose
/// sampling. Immutable once built.
class MotionDataset {
 public:
  MotionDataset() = default;
  /// Throws InvalidClip if a clip does not match the skeleton.
  MotionDataset(SkeletonSpec skeleton, std::vector<MotionClip> clips);

  const SkeletonSpec& skeleton() const { return skeleton_; }
  const std::vector<MotionClip>& clips() const { return clips_; }
  const std::vector<FrameRef>& index() const { return index_; }
  const Pose& frame(const FrameRef& ref) const { return clips_[ref.clip].frames[ref.frame]; }
  bool empty() const { return clips_.empty(); }
  int size() const { return static_cast<int>(clips_.size()); }

 private:
  SkeletonSpec skeleton_;
  std::vector<MotionClip> clips_;
  std::vector<FrameRef> index_;
};

/// A dataset directory holds skeleton.json plus one mhc-clip/1 file per clip
/// (*.clip.json), loaded in lexicographic order.
MotionDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const MotionDataset& ds, const std::filesystem::path& dir);

}  // namespace mhc::dataset
