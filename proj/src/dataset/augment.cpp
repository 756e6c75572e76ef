#include "mhc/dataset/augment.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"
#include "mhc/motion/kinematics.hpp"

#include <algorithm>

namespace mhc::dataset {

std::vector<bool> AugmentSpec::resolve_upper(const SkeletonSpec& skel) const {
  if (upper_joints.empty()) return skel.upper_body_mask();
  if (static_cast<int>(upper_joints.size()) != skel.joint_count())
    throw std::invalid_argument("upper joint mask length must equal the joint count");
  return upper_joints;
}

MotionClip combine_upper_lower(const SkeletonSpec& skel, const MotionClip& lower_src,
                               const MotionClip& upper_src, int length,
                               const std::vector<bool>& upper_joints, int lower_start, int upper_start) {
  if (length <= 0 || lower_start < 0 || upper_start < 0 || lower_start + length > lower_src.length() ||
      upper_start + length > upper_src.length())
    throw ClipTooShort("combine: source clips are shorter than the requested window");
  if (lower_src.skeleton != upper_src.skeleton || lower_src.skeleton != skel.name())
    throw InvalidClip("combine: clips use different skeletons");

  MotionClip out;
  out.name = lower_src.name + "+" + upper_src.name;
  out.fps = lower_src.fps;
  out.skeleton = skel.name();
  out.source = motion::ClipSource::kCombined;
  out.frames.reserve(length);
  for (int t = 0; t < length; ++t) {
    Pose p = lower_src.frames[lower_start + t];
    const Pose& up = upper_src.frames[upper_start + t];
    for (int c = 0; c < skel.joint_count(); ++c)
      if (upper_joints[c]) p.joint_rot[c] = up.joint_rot[c];
    motion::refresh_positions(skel, p);
    out.frames.push_back(std::move(p));
  }
  return out;
}

MotionDataset build_mplus(const MotionDataset& ds, const AugmentSpec& spec, int n_combos,
                          std::uint64_t seed) {
  if (ds.empty()) throw DatasetTooSmall("build_mplus: dataset is empty");
  std::vector<MotionClip> clips = ds.clips();
  if (!spec.enable_combinations || n_combos <= 0) return MotionDataset(ds.skeleton(), std::move(clips));

  const auto upper = spec.resolve_upper(ds.skeleton());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, ds.size() - 1);
  for (int k = 0; k < n_combos; ++k) {
    const auto& lower = ds.clips()[pick(rng)];
    const auto& up = ds.clips()[pick(rng)];
    const int length = std::min({spec.combo_length, lower.length(), up.length()});
    const int lo = std::uniform_int_distribution<int>(0, lower.length() - length)(rng);
    const int uo = std::uniform_int_distribution<int>(0, up.length() - length)(rng);
    auto combo = combine_upper_lower(ds.skeleton(), lower, up, length, upper, lo, uo);
    combo.name += "#" + std::to_string(k);
    clips.push_back(std::move(combo));
  }
  return MotionDataset(ds.skeleton(), std::move(clips));
}

InitialPose sample_initial_pose(const MotionDataset& mplus, const std::vector<Pose>& fall_bank,
                                double p_fall, std::mt19937_64& rng) {
  if (mplus.index().empty()) throw DatasetTooSmall("sample_initial_pose: dataset is empty");
  if (p_fall > 0.0 && fall_bank.empty()) throw EmptyBank("fallen-pose bank is empty");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  InitialPose out;
  out.fallen = p_fall > 0.0 && unit(rng) < p_fall;
  if (out.fallen) {
    std::uniform_int_distribution<std::size_t> pick(0, fall_bank.size() - 1);
    out.pose = fall_bank[pick(rng)];
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, mplus.index().size() - 1);
    out.pose = mplus.frame(mplus.index()[pick(rng)]);
  }
  out.yaw = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  out.pose = motion::rotate_pose_inplane(out.pose, out.yaw, out.pose.root.position.head<2>());
  return out;
}

std::vector<Pose> generate_fall_bank(const MotionDataset& mplus, const sim::Simulator& sim, int count,
                                     std::uint64_t seed, double settle_seconds) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, mplus.index().size() - 1);
  std::uniform_real_distribution<double> dir(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> lean(0.5, 1.2);
  std::uniform_real_distribution<double> lift(0.0, 0.3);
  const int steps = static_cast<int>(settle_seconds * sim.config().control_hz);

  std::vector<Pose> bank;
  int attempts = 0;
  while (static_cast<int>(bank.size()) < count) {
    if (++attempts > 20 * count + 20) throw EmptyBank("could not generate fallen poses");
    Pose p = mplus.frame(mplus.index()[pick(rng)]);
    const double heading = dir(rng);
    const Vec3 axis(-std::sin(heading), std::cos(heading), 0.0);
    const Mat3 tilted = Eigen::AngleAxisd(lean(rng), axis).toRotationMatrix() * p.root.rotation();
    p.root.orientation = motion::matrix_to_sixd(tilted);
    p.root.position.z() += lift(rng);
    p.root.linear_velocity.setZero();
    p.root.angular_velocity = 1.5 * axis;
    motion::refresh_positions(sim.skeleton(), p);

    auto state = sim.reset(p);
    const auto hold = sim.hold_action(state);
    for (int k = 0; k < steps; ++k) state = sim.step(state, hold).first;
    if (!state.fallen) continue;
    Pose rest = state.pose;
    rest.root.linear_velocity.setZero();
    rest.root.angular_velocity.setZero();
    bank.push_back(std::move(rest));
  }
  return bank;
}

}  // namespace mhc::dataset
