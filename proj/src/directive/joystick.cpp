#include "mhc/directive/joystick.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/rotation.hpp"

#include <algorithm>
#include <cmath>

namespace mhc::directive {

DirectiveMask joystick_mask(int joint_count) {
  DirectiveMask m;
  m.channels[static_cast<int>(Channel::kRoot)] = true;
  m.joint_mask.assign(joint_count, false);
  m.root_fields = {RootField::kHeight, RootField::kOrientation, RootField::kVelocity};
  return m;
}

Pose command_frame(const RootCommand& c, int joint_count) {
  if (!std::isfinite(c.speed) || !std::isfinite(c.heading) || !std::isfinite(c.facing) || !std::isfinite(c.height))
    throw InvalidDirective("root command has a non-finite value");
  Pose p = motion::rest_pose(joint_count, c.height);
  p.joint_local.assign(joint_count, Vec3::Zero());
  p.joint_global.assign(joint_count, Vec3::Zero());
  p.root.orientation = motion::matrix_to_sixd(motion::yaw_matrix(c.facing));
  p.root.linear_velocity = Vec3(c.speed * std::cos(c.heading), c.speed * std::sin(c.heading), 0.0);
  return p;
}

Directive joystick_directive(const std::vector<RootCommand>& commands, int joint_count, int horizon, double fps) {
  if (commands.empty()) throw InvalidDirective("joystick directive needs at least one command");
  Directive d;
  d.mask = joystick_mask(joint_count);
  d.horizon = horizon;
  d.fps = fps;
  d.frames.reserve(commands.size());
  for (const auto& c : commands) d.frames.push_back(command_frame(c, joint_count));
  d.validate(joint_count);
  return d;
}

Directive joystick_directive(const RootCommand& command, int frames, int joint_count, int horizon, double fps) {
  return joystick_directive(std::vector<RootCommand>(std::max(frames, 1), command), joint_count, horizon, fps);
}

}  // namespace mhc::directive
