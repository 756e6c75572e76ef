#include "mhc/eval/metrics.hpp"

#include "mhc/errors.hpp"

#include <algorithm>
#include <string>

namespace mhc::eval {

std::vector<int> metric_joints(const DirectiveMask& mask) {
  std::vector<int> out;
  for (int c = 0; c < static_cast<int>(mask.joint_mask.size()); ++c)
    if (mask.joint_selected(c)) out.push_back(c);
  if (out.empty()) throw NoSelectedJoints("directive " + mask.describe() + " selects no joint positions");
  return out;
}

namespace {

void check_lengths(std::span<const Pose> generated, const Directive& target) {
  if (static_cast<int>(generated.size()) != target.length())
    throw LengthMismatch("generated motion has " + std::to_string(generated.size()) + " frames, directive has " +
                         std::to_string(target.length()));
  if (generated.empty()) throw LengthMismatch("empty motion");
}

}  // namespace

double mpjpe(std::span<const Pose> generated, const Directive& target) {
  check_lengths(generated, target);
  const auto joints = metric_joints(target.mask);
  double sum = 0.0;
  for (std::size_t t = 0; t < generated.size(); ++t)
    for (int c : joints) sum += (generated[t].joint_local[c] - target.frames[t].joint_local[c]).norm();
  return 1000.0 * sum / static_cast<double>(generated.size() * joints.size());
}

double failed_frame_fraction(std::span<const Pose> generated, const Directive& target) {
  check_lengths(generated, target);
  const auto joints = metric_joints(target.mask);
  int failed = 0;
  for (std::size_t t = 0; t < generated.size(); ++t) {
    double worst = 0.0;
    for (int c : joints)
      worst = std::max(worst, (generated[t].joint_global[c] - target.frames[t].joint_global[c]).norm());
    if (worst > kFailedFrameError) ++failed;
  }
  return static_cast<double>(failed) / static_cast<double>(generated.size());
}

bool success(std::span<const Pose> generated, const Directive& target, double budget) {
  return failed_frame_fraction(generated, target) < budget;
}

}  // namespace mhc::eval
