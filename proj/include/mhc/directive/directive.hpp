#pragma once

#include "mhc/motion/pose.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace mhc::directive {

using motion::Pose;

/// Pose channels q^r, q^theta, q^l, q^g.
enum class Channel { kRoot = 0, kTheta = 1, kLocal = 2, kGlobal = 3 };
inline constexpr int kNumChannels = 4;

/// Sub-fields of the root channel used by joystick-style directives.
enum class RootField { kHeight = 0, kOrientation = 1, kVelocity = 2 };
inline constexpr int kNumRootFields = 3;

/// Which pose dimensions a directive constrains. An empty `root_fields`
/// with the root channel selected means the whole root channel (position,
/// orientation, linear and angular velocity). `joint_mask[c]` selects joint c
/// in the position channels and must be all-false when neither is selected.
struct DirectiveMask {
  std::array<bool, kNumChannels> channels{};
  std::vector<bool> joint_mask;
  std::vector<RootField> root_fields;

  bool has(Channel c) const { return channels[static_cast<int>(c)]; }
  bool root_full() const { return has(Channel::kRoot) && root_fields.empty(); }
  bool root_field(RootField f) const;
  bool position_channel() const { return has(Channel::kLocal) || has(Channel::kGlobal); }
  bool joint_selected(int c) const { return position_channel() && joint_mask[c]; }
  int selected_joint_count() const;
  bool any_selected() const;

  /// Throws InvalidDirective.
  void validate(int joint_count) const;

  /// Compact label, e.g. "R+THETA+L", "G[5/14]", "R{height,orientation,velocity}".
  std::string describe() const;

  bool operator==(const DirectiveMask&) const = default;
};

/// Masked motion window (q_hat, I). The mask is shared by every frame.
struct Directive {
  std::vector<Pose> frames;
  DirectiveMask mask;
  int horizon = 10;
  double fps = 30.0;

  int length() const { return static_cast<int>(frames.size()); }
  /// Frame t clamped to the last frame.
  const Pose& at(int t) const;
  void validate(int joint_count) const;
};

std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);
std::string to_string(RootField f);
RootField root_field_from_string(const std::string& s);

inline constexpr const char* kDirectiveSchema = "mhc-directive/1";

nlohmann::json to_json(const DirectiveMask& mask);
DirectiveMask mask_from_json(const nlohmann::json& j, int joint_count);

/// Frames carry only the selected fields; unselected joints are null.
nlohmann::json to_json(const Directive& d);
/// Missing fields decode as zero vectors / identity rotations.
Directive directive_from_json(const nlohmann::json& j, int joint_count);

Directive load_directive(const std::filesystem::path& path, int joint_count);
void save_directive(const Directive& d, const std::filesystem::path& path);

}  // namespace mhc::directive
