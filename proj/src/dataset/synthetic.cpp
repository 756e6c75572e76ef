#include "mhc/dataset/synthetic.hpp"

#include "mhc/motion/clip_ops.hpp"
#include "mhc/motion/kinematics.hpp"
#include "mhc/motion/rotation.hpp"
#include "mhc/sim/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mhc::dataset {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Channels {
  int torso, head, r_shoulder, r_elbow, r_hand, l_shoulder, l_elbow, l_hand;
  int r_hip, r_knee, r_foot, l_hip, l_knee, l_foot;
};

Channels channels(const SkeletonSpec& skel) {
  auto c = [&](const char* n) {
    const int i = skel.channel_of(n);
    if (i < 0) throw std::invalid_argument(std::string("synthetic clips need joint ") + n);
    return i;
  };
  return {c("torso"),     c("head"),      c("right_shoulder"), c("right_elbow"), c("right_hand"),
          c("left_shoulder"), c("left_elbow"), c("left_hand"), c("right_hip"), c("right_knee"),
          c("right_foot"), c("left_hip"),   c("left_knee"),    c("left_foot")};
}

// Sign conventions (z up, x forward, y left): forward flexion of a hanging
// limb is a negative rotation about y, knee flexion is positive about y, and
// abduction of the right arm is a negative rotation about x.
Vec3 flex(double a) { return Vec3(0, -a, 0); }
Vec3 knee(double a) { return Vec3(0, a, 0); }

struct Gait {
  double freq, hip_amp, hip_base, knee_swing, knee_base, arm_amp, elbow, lean;
};

void gait(const Channels& ch, const Gait& g, double t, std::vector<Vec3>& q) {
  const double phase = kTwoPi * g.freq * t;
  auto leg = [&](int hip, int kn, int foot, double ph) {
    const double h = g.hip_base + g.hip_amp * std::cos(ph);
    const double k = g.knee_base + g.knee_swing * std::max(0.0, -std::sin(ph));
    q[hip] = flex(h);
    q[kn] = knee(k);
    q[foot] = flex(k - h);
  };
  leg(ch.r_hip, ch.r_knee, ch.r_foot, phase);
  leg(ch.l_hip, ch.l_knee, ch.l_foot, phase + std::numbers::pi);
  // Arms swing against the legs.
  q[ch.r_shoulder] = flex(-g.arm_amp * std::cos(phase + std::numbers::pi));
  q[ch.l_shoulder] = flex(-g.arm_amp * std::cos(phase));
  q[ch.r_elbow] = flex(g.elbow);
  q[ch.l_elbow] = flex(g.elbow);
  q[ch.torso] = Vec3(0, g.lean, 0);
}

std::vector<Vec3> joint_curves(const Channels& ch, int n, SyntheticMotion m, double t) {
  std::vector<Vec3> q(n, Vec3::Zero());
  switch (m) {
    case SyntheticMotion::kWalk:
      gait(ch, {1.0, 0.35, 0.0, 0.8, 0.05, 0.3, 0.2, 0.05}, t, q);
      break;
    case SyntheticMotion::kRun:
      gait(ch, {1.5, 0.55, 0.1, 1.4, 0.2, 0.5, 1.2, 0.15}, t, q);
      break;
    case SyntheticMotion::kCrouchWalk:
      gait(ch, {0.8, 0.25, 0.75, 0.5, 1.45, 0.2, 0.6, 0.4}, t, q);
      break;
    case SyntheticMotion::kWave: {
      const double w = kTwoPi * 1.5 * t;
      q[ch.r_shoulder] = Vec3(-2.4, 0, 0);
      q[ch.r_elbow] = Vec3(-(0.6 + 0.4 * std::sin(w)), 0, 0);
      q[ch.l_shoulder] = Vec3(0.1, 0, 0);
      q[ch.torso] = Vec3(0.03 * std::sin(0.5 * w), 0, 0);
      q[ch.head] = Vec3(0, 0, 0.2 * std::sin(0.25 * w));
      break;
    }
    case SyntheticMotion::kIdleSway: {
      const double w = kTwoPi * 0.3 * t;
      q[ch.torso] = Vec3(0.06 * std::sin(w), 0.03 * std::sin(2 * w), 0.05 * std::sin(0.5 * w));
      q[ch.head] = Vec3(0, 0.05 * std::sin(w), 0.15 * std::sin(0.7 * w));
      q[ch.r_shoulder] = Vec3(-0.1 - 0.05 * std::sin(w), 0, 0);
      q[ch.l_shoulder] = Vec3(0.1 + 0.05 * std::sin(w), 0, 0);
      q[ch.r_elbow] = flex(0.2);
      q[ch.l_elbow] = flex(0.2);
      break;
    }
    case SyntheticMotion::kArmRaise: {
      const double lift = 1.2 * (1.0 - std::cos(kTwoPi * 0.25 * t));
      q[ch.r_shoulder] = flex(lift);
      q[ch.l_shoulder] = flex(lift);
      q[ch.r_elbow] = flex(0.3 * lift / 2.4);
      q[ch.l_elbow] = flex(0.3 * lift / 2.4);
      q[ch.head] = Vec3(0, -0.2 * lift / 2.4, 0);
      break;
    }
  }
  return q;
}

}  // namespace

std::string to_string(SyntheticMotion m) {
  switch (m) {
    case SyntheticMotion::kWalk: return "walk";
    case SyntheticMotion::kRun: return "run";
    case SyntheticMotion::kWave: return "wave";
    case SyntheticMotion::kIdleSway: return "idle_sway";
    case SyntheticMotion::kCrouchWalk: return "crouch_walk";
    case SyntheticMotion::kArmRaise: return "arm_raise";
  }
  return "walk";
}

std::vector<Pose> place_root_kinematically(const SkeletonSpec& skel,
                                           const std::vector<std::vector<Vec3>>& joint_expmaps,
                                           double fps) {
  const int n = skel.joint_count();
  const int frames = static_cast<int>(joint_expmaps.size());
  const double dt = 1.0 / fps;
  const auto& feet = skel.foot_channels();
  const sim::SimConfig cfg;

  auto locals = [&](int t) {
    std::vector<Mat3> m(n);
    for (int c = 0; c < n; ++c) m[c] = motion::expmap_to_matrix(joint_expmaps[t][c]);
    return m;
  };

  std::vector<Pose> out(frames);
  Vec2 xy = Vec2::Zero();
  double yaw = 0.0;
  for (int t = 0; t < frames; ++t) {
    const Mat3 rot = motion::yaw_matrix(yaw);
    const auto local_t = locals(t);
    const auto fk = motion::forward_kinematics(skel, Vec3::Zero(), rot, local_t);
    double lowest = 0.0;
    for (const auto& g : fk.global) lowest = std::min(lowest, g.z());
    const double height = cfg.ground_height - lowest;

    Pose& p = out[t];
    p.root.position = Vec3(xy.x(), xy.y(), height);
    p.root.orientation = motion::matrix_to_sixd(rot);
    p.joint_rot.resize(n);
    for (int c = 0; c < n; ++c) p.joint_rot[c] = motion::matrix_to_sixd(local_t[c]);
    motion::refresh_positions(skel, p);

    if (t + 1 == frames) break;
    std::vector<double> heights(n + 1);
    heights[0] = height;
    for (int c = 0; c < n; ++c) heights[c + 1] = fk.global[c].z() + height;
    const auto fk_next = motion::forward_kinematics(skel, Vec3::Zero(), rot, locals(t + 1));
    std::vector<Vec2> offsets, rel_vel;
    for (int idx : sim::contact_set(heights, cfg.ground_height, cfg.stance_tolerance)) {
      const int c = idx - 1;
      if (c < 0 || std::find(feet.begin(), feet.end(), c) == feet.end()) continue;
      offsets.push_back(fk.global[c].head<2>());
      rel_vel.push_back(((fk_next.global[c] - fk.global[c]) / dt).head<2>());
    }
    const Vec3 motion = sim::planted_foot_motion(offsets, rel_vel);
    xy += dt * motion.head<2>();
    yaw += dt * motion.z();
  }
  return out;
}

MotionClip synthesize_clip(const SkeletonSpec& skel, SyntheticMotion m, int frames, double fps) {
  const Channels ch = channels(skel);
  std::vector<std::vector<Vec3>> q(frames);
  for (int t = 0; t < frames; ++t) q[t] = joint_curves(ch, skel.joint_count(), m, t / fps);
  MotionClip clip;
  clip.name = to_string(m);
  clip.fps = fps;
  clip.skeleton = skel.name();
  clip.source = motion::ClipSource::kRaw;
  clip.frames = place_root_kinematically(skel, q, fps);
  motion::recompute_root_velocities(clip);
  return clip;
}

MotionDataset synthetic_dataset(const SkeletonSpec& skel, int count, int frames) {
  static constexpr SyntheticMotion kOrder[] = {SyntheticMotion::kWalk,     SyntheticMotion::kRun,
                                               SyntheticMotion::kWave,     SyntheticMotion::kIdleSway,
                                               SyntheticMotion::kCrouchWalk, SyntheticMotion::kArmRaise};
  if (count < 1 || count > 6) throw std::invalid_argument("synthetic dataset holds 1 to 6 clips");
  std::vector<MotionClip> clips;
  for (int i = 0; i < count; ++i) clips.push_back(synthesize_clip(skel, kOrder[i], frames));
  return MotionDataset(skel, std::move(clips));
}

}  // namespace mhc::dataset
