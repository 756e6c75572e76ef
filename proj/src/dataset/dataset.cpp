#include "mhc/dataset/dataset.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/io.hpp"

#include <algorithm>

namespace mhc::dataset {

MotionDataset::MotionDataset(SkeletonSpec skeleton, std::vector<MotionClip> clips)
    : skeleton_(std::move(skeleton)), clips_(std::move(clips)) {
  for (int c = 0; c < static_cast<int>(clips_.size()); ++c) {
    const auto& clip = clips_[c];
    if (clip.skeleton != skeleton_.name())
      throw InvalidClip(clip.name + ": skeleton " + clip.skeleton + " does not match " + skeleton_.name());
    for (int t = 0; t < clip.length(); ++t) {
      if (clip.frames[t].joint_count() != skeleton_.joint_count())
        throw InvalidClip(clip.name + ": joint count mismatch");
      index_.push_back({c, t});
    }
  }
}

MotionDataset load_dataset(const std::filesystem::path& dir) {
  const auto skel = motion::load_skeleton(dir / "skeleton.json");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() > 10 && name.ends_with(".clip.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<MotionClip> clips;
  for (const auto& f : files) clips.push_back(motion::load_clip(f, skel));
  return MotionDataset(skel, std::move(clips));
}

void save_dataset(const MotionDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  motion::save_skeleton(ds.skeleton(), dir / "skeleton.json");
  int k = 0;
  for (const auto& clip : ds.clips()) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%03d_", k++);
    motion::save_clip(clip, dir / (prefix + clip.name + ".clip.json"));
  }
}

}  // namespace mhc::dataset
