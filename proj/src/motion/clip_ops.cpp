#include "mhc/motion/clip_ops.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/kinematics.hpp"

#include <cmath>

namespace mhc::motion {

Pose rotate_pose_inplane(const Pose& pose, double yaw, const Vec2& pivot) {
  const Mat3 rz = yaw_matrix(yaw);
  const Vec3 pivot3(pivot.x(), pivot.y(), 0.0);
  Pose out = pose;
  out.root.position = pivot3 + rz * (pose.root.position - pivot3);
  Rot6 o;
  const Mat3 r = rz * pose.root.rotation();
  o.head<3>() = r.col(0);
  o.tail<3>() = r.col(1);
  out.root.orientation = o;
  out.root.linear_velocity = rz * pose.root.linear_velocity;
  out.root.angular_velocity = rz * pose.root.angular_velocity;
  for (auto& g : out.joint_global) g = pivot3 + rz * (g - pivot3);
  return out;
}

MotionClip apply_inplane_rotation(const MotionClip& clip, double yaw, const Vec2& pivot) {
  MotionClip out = clip;
  if (yaw == 0.0) return out;
  for (auto& f : out.frames) f = rotate_pose_inplane(f, yaw, pivot);
  return out;
}

Pose translate_pose(const Pose& pose, const Vec3& delta) {
  Pose out = pose;
  out.root.position += delta;
  for (auto& g : out.joint_global) g += delta;
  return out;
}

namespace {

Vec3 rotation_rate(const Mat3& from, const Mat3& to, double dt) {
  return matrix_to_expmap(to * from.transpose()) / dt;
}

}  // namespace

void recompute_root_velocities(MotionClip& clip) {
  const int n = clip.length();
  if (n == 0) return;
  if (n == 1) {
    clip.frames[0].root.linear_velocity.setZero();
    clip.frames[0].root.angular_velocity.setZero();
    return;
  }
  const double dt = 1.0 / clip.fps;
  std::vector<Mat3> rot(n);
  for (int t = 0; t < n; ++t) rot[t] = clip.frames[t].root.rotation();
  for (int t = 0; t < n; ++t) {
    const int a = std::max(0, t - 1);
    const int b = std::min(n - 1, t + 1);
    const double span = (b - a) * dt;
    auto& root = clip.frames[t].root;
    root.linear_velocity = (clip.frames[b].root.position - clip.frames[a].root.position) / span;
    root.angular_velocity = rotation_rate(rot[a], rot[b], span);
  }
}

void validate_clip(const SkeletonSpec& skel, MotionClip& clip, const ClipTolerances& tol) {
  if (!(clip.fps > 0.0)) throw InvalidClip(clip.name + ": fps must be positive");
  if (clip.frames.empty()) throw InvalidClip(clip.name + ": clip has no frames");
  const int j = skel.joint_count();
  for (std::size_t t = 0; t < clip.frames.size(); ++t) {
    auto& f = clip.frames[t];
    if (f.joint_rot.size() != static_cast<std::size_t>(j))
      throw InvalidClip(clip.name + ": frame " + std::to_string(t) + " joint count mismatch");
    if (!f.root.position.allFinite() || !f.root.linear_velocity.allFinite() ||
        !f.root.angular_velocity.allFinite())
      throw InvalidClip(clip.name + ": frame " + std::to_string(t) + " has non-finite root values");
    try {
      if (f.joint_global.empty() || f.joint_local.empty()) {
        refresh_positions(skel, f);
      } else if (fk_consistency_error(skel, f) > tol.fk) {
        throw InvalidClip(clip.name + ": frame " + std::to_string(t) +
                          " positions disagree with forward kinematics");
      }
    } catch (const DegenerateRotation& e) {
      throw InvalidClip(clip.name + ": frame " + std::to_string(t) + ": " + e.what());
    } catch (const ShapeMismatch& e) {
      throw InvalidClip(clip.name + ": frame " + std::to_string(t) + ": " + e.what());
    }
  }
  if (clip.frames.size() > 1) {
    const double dt = 1.0 / clip.fps;
    const int n = clip.length();
    for (int t = 0; t < n; ++t) {
      const int a = std::max(0, t - 1);
      const int b = std::min(n - 1, t + 1);
      const Vec3 fd = (clip.frames[b].root.position - clip.frames[a].root.position) / ((b - a) * dt);
      if ((fd - clip.frames[t].root.linear_velocity).norm() > tol.velocity)
        throw InvalidClip(clip.name + ": frame " + std::to_string(t) +
                          " root velocity inconsistent with positions");
    }
  }
}

}  // namespace mhc::motion
