#pragma once

#include "mhc/directive/directive.hpp"
#include "mhc/motion/skeleton.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mhc::server {

inline constexpr const char* kKeypointSchema = "mhc-keypoints/1";

/// Keypoint tracks ("mhc-keypoints/1"): {"fps", "frames": [{"joint": [x,y,z]
/// or null, ...}, ...]}. A joint is selected when it has a position in every
/// frame and is not listed in `occluded`; the result is a G-channel
/// directive. Throws SchemaError naming the frame and field.
directive::Directive keypoints_to_directive(const nlohmann::json& j, const motion::SkeletonSpec& skel,
                                            const std::vector<std::string>& occluded = {}, int horizon = 10);

/// CSV with a header naming speed, heading and height (facing optional,
/// defaulting to heading); one joystick frame per row. Throws SchemaError
/// with the line number.
directive::Directive root_commands_to_directive(const std::string& csv, int joint_count, int horizon = 10,
                                                double fps = 30.0);

/// Full-pose R+THETA+L directive, no joints masked.
directive::Directive clip_to_directive(const motion::MotionClip& clip, int horizon = 10);

directive::Directive load_keypoints(const std::filesystem::path& path, const motion::SkeletonSpec& skel,
                                    const std::vector<std::string>& occluded = {}, int horizon = 10);
directive::Directive load_root_commands(const std::filesystem::path& path, int joint_count, int horizon = 10,
                                        double fps = 30.0);

}  // namespace mhc::server
