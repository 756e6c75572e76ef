#pragma once

#include "mhc/dataset/dataset.hpp"
#include "mhc/directive/directive.hpp"

#include <optional>
#include <random>
#include <vector>

namespace mhc::directive {

inline constexpr int kChannelMenuSize = 5;
inline constexpr int kJoystickMenuIndex = 4;

/// Menu entry: 0 R+THETA+L, 1 R+THETA, 2 R+L, 3 G, 4 joystick root fields.
/// Position channels get an all-true joint mask. Throws InvalidDirective.
DirectiveMask channel_mask_from_menu(int index, int joint_count);

/// Uniform over `menu` (entries are menu indices).
DirectiveMask sample_channel_mask(std::mt19937_64& rng, int joint_count,
                                  const std::vector<int>& menu = {0, 1, 2, 3, 4},
                                  int* drawn_index = nullptr);

/// true = selected. floor(p * J / 100) uniformly chosen joints are masked out.
std::vector<bool> joint_mask_for_percentage(double percent, int joint_count, std::mt19937_64& rng);
std::vector<bool> sample_joint_mask(std::mt19937_64& rng, int joint_count);

/// Restricts the position channels to `joints`. A result that would select
/// nothing keeps the lowest-index joint.
DirectiveMask compose_joint_mask(DirectiveMask mask, const std::vector<bool>& joints);

struct EpisodeSpec {
  int length = 300;
  int min_segment = 120;
  int max_segment = 240;
  std::vector<int> channel_menu{0, 1, 2, 3, 4};
  double joint_mask_prob = 0.5;
  int horizon = 10;

  /// Throws InvalidDirective.
  void validate() const;
};

/// A clip sub-range placed into an episode. `yaw` rotates it about its own
/// first root position before it is chained onto the previous segment.
struct Segment {
  int clip = 0;
  int start = 0;
  int length = 0;
  double yaw = 0.0;
};

/// Concatenates segments, truncating to `length` frames. Each segment is
/// turned by its yaw and translated so its first root lies where the previous
/// segment ended (the first one at `origin`).
std::vector<Pose> assemble_frames(const dataset::MotionDataset& mplus, const std::vector<Segment>& segments,
                                  int length, const Vec2& origin);

struct EpisodeDirective {
  Directive directive;
  std::vector<Segment> segments;
  int menu_index = 0;
  bool joint_masking = false;
};

/// Random segments (lengths clamped to the clip) then a random mask. When
/// `forced_lengths` is given, its entries replace the drawn segment lengths
/// in order. Throws DatasetTooSmall.
EpisodeDirective build_episode_directive(const dataset::MotionDataset& mplus, const EpisodeSpec& spec,
                                         std::mt19937_64& rng, const Vec2& origin = Vec2::Zero(),
                                         const std::vector<int>& forced_lengths = {});

}  // namespace mhc::directive
