#include "mhc/directive/episode.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mhc::directive {

DirectiveMask channel_mask_from_menu(int index, int joint_count) {
  DirectiveMask m;
  auto set = [&](Channel c) { m.channels[static_cast<int>(c)] = true; };
  switch (index) {
    case 0: set(Channel::kRoot); set(Channel::kTheta); set(Channel::kLocal); break;
    case 1: set(Channel::kRoot); set(Channel::kTheta); break;
    case 2: set(Channel::kRoot); set(Channel::kLocal); break;
    case 3: set(Channel::kGlobal); break;
    case 4:
      set(Channel::kRoot);
      m.root_fields = {RootField::kHeight, RootField::kOrientation, RootField::kVelocity};
      break;
    default: throw InvalidDirective("channel menu index out of range: " + std::to_string(index));
  }
  m.joint_mask.assign(joint_count, m.position_channel());
  return m;
}

DirectiveMask sample_channel_mask(std::mt19937_64& rng, int joint_count, const std::vector<int>& menu,
                                  int* drawn_index) {
  if (menu.empty()) throw InvalidDirective("empty channel menu");
  std::uniform_int_distribution<int> pick(0, static_cast<int>(menu.size()) - 1);
  const int index = menu[pick(rng)];
  if (drawn_index) *drawn_index = index;
  return channel_mask_from_menu(index, joint_count);
}

std::vector<bool> joint_mask_for_percentage(double percent, int joint_count, std::mt19937_64& rng) {
  if (joint_count <= 0) throw InvalidDirective("joint count must be positive");
  const int masked = std::clamp(static_cast<int>(std::floor(percent * joint_count / 100.0)), 0, joint_count);
  std::vector<int> order(joint_count);
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first `masked` entries are a uniform subset.
  for (int i = 0; i < masked; ++i) {
    std::uniform_int_distribution<int> pick(i, joint_count - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<bool> selected(joint_count, true);
  for (int i = 0; i < masked; ++i) selected[order[i]] = false;
  return selected;
}

std::vector<bool> sample_joint_mask(std::mt19937_64& rng, int joint_count) {
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  return joint_mask_for_percentage(pct(rng), joint_count, rng);
}

DirectiveMask compose_joint_mask(DirectiveMask mask, const std::vector<bool>& joints) {
  if (joints.size() != mask.joint_mask.size()) throw InvalidDirective("joint mask length mismatch");
  if (!mask.position_channel()) return mask;
  for (std::size_t c = 0; c < joints.size(); ++c) mask.joint_mask[c] = mask.joint_mask[c] && joints[c];
  if (!mask.any_selected() && !joints.empty()) mask.joint_mask[0] = true;
  return mask;
}

void EpisodeSpec::validate() const {
  if (length <= 0) throw InvalidDirective("episode length must be positive");
  if (min_segment <= 0 || max_segment < min_segment) throw InvalidDirective("bad segment length range");
  if (channel_menu.empty()) throw InvalidDirective("empty channel menu");
  for (int i : channel_menu)
    if (i < 0 || i >= kChannelMenuSize) throw InvalidDirective("channel menu index out of range");
  if (!(joint_mask_prob >= 0.0 && joint_mask_prob <= 1.0)) throw InvalidDirective("joint_mask_prob outside [0,1]");
  if (horizon < 1) throw InvalidDirective("horizon must be positive");
}

std::vector<Pose> assemble_frames(const dataset::MotionDataset& mplus, const std::vector<Segment>& segments,
                                  int length, const Vec2& origin) {
  std::vector<Pose> out;
  out.reserve(length);
  Vec2 anchor = origin;
  for (const auto& seg : segments) {
    if (static_cast<int>(out.size()) >= length) break;
    const auto& clip = mplus.clips().at(seg.clip);
    if (seg.start < 0 || seg.length <= 0 || seg.start + seg.length > clip.length())
      throw InvalidDirective("segment outside its clip");
    const Pose& first = clip.frames[seg.start];
    const Vec2 pivot = first.root.position.head<2>();
    const Vec3 shift(anchor.x() - pivot.x(), anchor.y() - pivot.y(), 0.0);
    const int take = std::min(seg.length, length - static_cast<int>(out.size()));
    for (int i = 0; i < take; ++i) {
      Pose p = clip.frames[seg.start + i];
      if (seg.yaw != 0.0) p = motion::rotate_pose_inplane(p, seg.yaw, pivot);
      out.push_back(motion::translate_pose(p, shift));
    }
    // The next segment starts one frame-step beyond where this one ends.
    const Pose& last = out.back();
    anchor = last.root.position.head<2>() + last.root.linear_velocity.head<2>() / clip.fps;
  }
  return out;
}

EpisodeDirective build_episode_directive(const dataset::MotionDataset& mplus, const EpisodeSpec& spec,
                                         std::mt19937_64& rng, const Vec2& origin,
                                         const std::vector<int>& forced_lengths) {
  spec.validate();
  if (mplus.empty()) throw DatasetTooSmall("episode directives need at least one clip");
  const int J = mplus.skeleton().joint_count();

  EpisodeDirective ep;
  std::uniform_int_distribution<int> pick_clip(0, mplus.size() - 1);
  std::uniform_int_distribution<int> pick_len(spec.min_segment, spec.max_segment);
  std::uniform_real_distribution<double> pick_yaw(0.0, 2.0 * std::numbers::pi);
  int total = 0;
  while (total < spec.length) {
    Segment seg;
    seg.clip = pick_clip(rng);
    const int clip_len = mplus.clips()[seg.clip].length();
    if (clip_len <= 0) throw DatasetTooSmall("empty clip in dataset");
    int len = pick_len(rng);
    const std::size_t k = ep.segments.size();
    if (k < forced_lengths.size()) len = forced_lengths[k];
    seg.length = std::min(len, clip_len);
    std::uniform_int_distribution<int> pick_start(0, clip_len - seg.length);
    seg.start = pick_start(rng);
    seg.yaw = pick_yaw(rng);
    seg.length = std::min(seg.length, spec.length - total);
    total += seg.length;
    ep.segments.push_back(seg);
  }

  DirectiveMask mask = sample_channel_mask(rng, J, spec.channel_menu, &ep.menu_index);
  std::bernoulli_distribution apply_joint_mask(spec.joint_mask_prob);
  ep.joint_masking = apply_joint_mask(rng);
  if (ep.joint_masking) mask = compose_joint_mask(std::move(mask), sample_joint_mask(rng, J));

  ep.directive.frames = assemble_frames(mplus, ep.segments, spec.length, origin);
  ep.directive.mask = std::move(mask);
  ep.directive.horizon = spec.horizon;
  ep.directive.fps = mplus.clips().front().fps;
  return ep;
}

}  // namespace mhc::directive
