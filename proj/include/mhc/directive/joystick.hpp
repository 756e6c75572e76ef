#pragma once

#include "mhc/directive/directive.hpp"

#include <vector>

namespace mhc::directive {

/// One joystick sample: planar speed (m/s) along `heading`, body facing and
/// root height target.
struct RootCommand {
  double speed = 0.0;
  double heading = 0.0;  // rad, direction of travel
  double facing = 0.0;   // rad
  double height = 0.85;  // m
};

/// Root-fields mask {height, orientation, velocity}, no joints.
DirectiveMask joystick_mask(int joint_count);

/// Frame for a command: root height, yaw-only orientation and planar
/// velocity; everything else at rest.
Pose command_frame(const RootCommand& c, int joint_count);

/// One frame per command. Throws InvalidDirective on an empty list or
/// non-finite values.
Directive joystick_directive(const std::vector<RootCommand>& commands, int joint_count, int horizon = 10,
                             double fps = 30.0);

/// `frames` copies of a single command.
Directive joystick_directive(const RootCommand& command, int frames, int joint_count, int horizon = 10,
                             double fps = 30.0);

}  // namespace mhc::directive
