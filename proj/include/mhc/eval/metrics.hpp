#pragma once

#include "mhc/directive/directive.hpp"
#include "mhc/motion/pose.hpp"

#include <span>
#include <vector>

namespace mhc::eval {

using directive::Directive;
using directive::DirectiveMask;
using motion::Pose;

inline constexpr double kFailedFrameError = 1.0;  // m
inline constexpr double kDefaultBudget = 0.10;
inline constexpr double kCatchupBudget = 0.25;

/// Joints scored for a mask: the position-channel selection. Throws
/// NoSelectedJoints when no joint is selected.
std::vector<int> metric_joints(const DirectiveMask& mask);

/// Mean over frames and selected joints of |q^l_gen - q^l_target| in mm.
/// Throws LengthMismatch, NoSelectedJoints.
double mpjpe(std::span<const Pose> generated, const Directive& target);

/// Fraction of frames whose largest selected-joint error in q^g exceeds 1 m.
double failed_frame_fraction(std::span<const Pose> generated, const Directive& target);

/// Success iff the failed-frame fraction is strictly below `budget`.
bool success(std::span<const Pose> generated, const Directive& target, double budget = kDefaultBudget);

}  // namespace mhc::eval
