#include "harness.hpp"
#include "mhc/directive/episode.hpp"
#include "mhc/eval/metrics.hpp"
#include "mhc/eval/protocol.hpp"
#include "mhc/motion/kinematics.hpp"
#include "mhc/motion/pose.hpp"
#include "mhc/motion/rotation.hpp"
#include "mhc/motion/skeleton.hpp"
#include "mhc/reward/reward.hpp"

#include <cmath>

namespace mhc::acceptance {
namespace {

using directive::Channel;
using directive::DirectiveMask;
using directive::RootField;
using motion::Pose;

constexpr int kJ = 14;

Pose random_pose(std::mt19937_64& rng, double spread = 1.0) {
  Pose p = motion::rest_pose(kJ, 0.9);
  p.root.position = random_vec3(rng, spread);
  p.root.orientation = motion::matrix_to_sixd(random_rotation(rng));
  p.root.linear_velocity = random_vec3(rng, spread);
  p.root.angular_velocity = random_vec3(rng, spread);
  for (auto& r : p.joint_rot) r = motion::matrix_to_sixd(random_rotation(rng));
  p.joint_local.resize(kJ);
  p.joint_global.resize(kJ);
  for (auto& l : p.joint_local) l = random_vec3(rng, spread);
  for (auto& g : p.joint_global) g = random_vec3(rng, spread);
  return p;
}

// Close enough that later gates open a fair share of the time.
Pose nearby(const Pose& p, std::mt19937_64& rng, double eps) {
  Pose q = p;
  q.root.position += random_vec3(rng, eps);
  const Mat3 R = Eigen::AngleAxisd(eps, random_vec3(rng).normalized()).toRotationMatrix() * p.root.rotation();
  q.root.orientation = motion::matrix_to_sixd(R);
  q.root.linear_velocity += random_vec3(rng, eps);
  q.root.angular_velocity += random_vec3(rng, eps);
  for (auto& l : q.joint_local) l += random_vec3(rng, eps * 0.1);
  for (auto& g : q.joint_global) g += random_vec3(rng, eps * 0.1);
  return q;
}

DirectiveMask random_mask(int i, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  auto m = directive::channel_mask_from_menu(i % directive::kChannelMenuSize, kJ);
  if (i % 2) m = directive::compose_joint_mask(m, directive::joint_mask_for_percentage(pct(rng), kJ, rng));
  if (i % 7 == 0) m.channels[static_cast<int>(Channel::kGlobal)] = m.has(Channel::kLocal);
  return m;
}

Outcome reward_kernel() {
  std::mt19937_64 rng(2024);
  std::string notes;
  bool ok = true;

  // 10 cm of height error with every root field selected.
  {
    const Pose p = random_pose(rng);
    Pose t = p;
    t.root.position.z() += 0.1;
    const auto r = reward::tracking_reward(p, t, directive::channel_mask_from_menu(0, kJ));
    const double err = std::abs(r.r_h - std::exp(-0.8));
    ok = ok && err < 1e-12 && r.r_o == 0.0 && r.r_v == 0.0 && r.r_l == 0.0;
    notes += fmt("r_h-e^-0.8=%.1e", err);
  }

  // Gates: each term is zero unless the previous one exceeds 0.9.
  int violations = 0, opened = 0;
  for (int i = 0; i < 10000; ++i) {
    std::uniform_real_distribution<double> eps(0.0, 0.15);
    const auto m = random_mask(i, rng);
    const Pose p = random_pose(rng);
    const Pose t = (i % 5 == 0) ? random_pose(rng) : nearby(p, rng, eps(rng));
    const auto r = reward::tracking_reward(p, t, m);
    bool bad = (r.r_h <= 0.9 && r.r_o != 0.0) || (r.r_o <= 0.9 && r.r_v != 0.0) || (r.r_v <= 0.9 && r.r_l != 0.0);
    for (double v : {r.r_h, r.r_o, r.r_v, r.r_l}) bad = bad || v < 0.0 || v > 1.0;
    violations += bad;
    opened += r.r_l > 0.0;
  }
  ok = ok && violations == 0 && opened > 100;
  notes += fmt("; gate violations %d/10000 (%d reached r_l)", violations, opened);

  // Unselected target dimensions never move the reward.
  int changed = 0;
  for (int i = 0; i < 10000; ++i) {
    auto m = directive::channel_mask_from_menu(i % directive::kChannelMenuSize, kJ);
    if (m.position_channel()) m = directive::compose_joint_mask(m, directive::joint_mask_for_percentage(50, kJ, rng));
    const Pose p = random_pose(rng);
    const Pose t = nearby(p, rng, 0.02);
    const Pose noise = random_pose(rng, 3.0);
    Pose f = t;
    if (!m.root_field(RootField::kHeight)) f.root.position.z() = noise.root.position.z();
    f.root.position.head<2>() = noise.root.position.head<2>();
    if (!m.root_field(RootField::kOrientation)) f.root.orientation = noise.root.orientation;
    if (!m.root_field(RootField::kVelocity)) {
      f.root.linear_velocity = noise.root.linear_velocity;
      f.root.angular_velocity.z() = noise.root.angular_velocity.z();
    }
    f.root.linear_velocity.z() = noise.root.linear_velocity.z();
    f.root.angular_velocity.head<2>() = noise.root.angular_velocity.head<2>();
    f.joint_rot = noise.joint_rot;
    for (int c = 0; c < kJ; ++c) {
      if (!(m.has(Channel::kLocal) && m.joint_mask[c])) f.joint_local[c] = noise.joint_local[c];
      if (!(m.has(Channel::kGlobal) && m.joint_mask[c])) f.joint_global[c] = noise.joint_global[c];
    }
    const auto a = reward::tracking_reward(p, t, m), b = reward::tracking_reward(p, f, m);
    changed += a.r_h != b.r_h || a.r_o != b.r_o || a.r_v != b.r_v || a.r_l != b.r_l;
  }
  ok = ok && changed == 0;
  notes += fmt("; mask-neutral changes %d/10000", changed);

  // |da|_1 = 0.5, |tau|_1 = 10: 0.01 * 0.5 + 0.0002 * 10.
  const double e = reward::energy_cost({Vec3(0.3, -0.1, 0.1)}, {Vec3::Zero()}, {Vec3(4.0, -5.0, 1.0)});
  ok = ok && std::abs(e - 0.007) < 1e-15;
  notes += fmt("; energy %.17g", e);
  return {ok, notes};
}

// Independent FK: world rotation and position carried down the parent chain.
std::vector<Vec3> chain_oracle(const motion::SkeletonSpec& skel, const Vec3& root_pos, const Mat3& root_rot,
                               const std::vector<Mat3>& local) {
  const auto& joints = skel.joints();
  std::vector<Mat3> rot(joints.size());
  std::vector<Vec3> pos(joints.size());
  rot[0] = root_rot;
  pos[0] = root_pos;
  for (std::size_t i = 1; i < joints.size(); ++i) {
    const int parent = joints[i].parent;
    pos[i] = pos[parent] + rot[parent] * joints[i].offset;
    rot[i] = rot[parent] * local[i - 1];
  }
  return {pos.begin() + 1, pos.end()};
}

Outcome rotation_fk() {
  std::mt19937_64 rng(77);
  double sixd = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = random_rotation(rng);
    sixd = std::max(sixd, (motion::sixd_to_matrix(motion::matrix_to_sixd(r)) - r).cwiseAbs().maxCoeff());
  }
  double fk = 0.0;
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<motion::JointDef> j = {{"root", -1, Vec3::Zero(), motion::PartLabel::kRootGroup, 3.0}};
    for (int i = 1; i <= 5; ++i) {
      const int parent = coin(rng) ? i - 1 : std::uniform_int_distribution<int>(0, i - 1)(rng);
      j.push_back({"j" + std::to_string(i), parent, random_vec3(rng, 0.5), motion::PartLabel::kLower, 3.0});
    }
    const motion::SkeletonSpec skel("chain5", j);
    std::vector<Mat3> local;
    for (int i = 0; i < 5; ++i) local.push_back(random_rotation(rng));
    const Vec3 root_pos = random_vec3(rng, 2.0);
    const Mat3 root_rot = random_rotation(rng);
    const auto got = motion::forward_kinematics(skel, root_pos, root_rot, local);
    const auto want = chain_oracle(skel, root_pos, root_rot, local);
    for (int c = 0; c < 5; ++c) {
      fk = std::max(fk, (got.global[c] - want[c]).norm());
      fk = std::max(fk, (got.local[c] - root_rot.transpose() * (want[c] - root_pos)).norm());
    }
  }
  return {sixd < 1e-9 && fk < 1e-9, fmt("6D round trip max %.1e over 1000; FK max %.1e over 1000 chains", sixd, fk)};
}

Pose blank_pose(int joints) {
  Pose p;
  p.joint_rot.assign(joints, Rot6(1, 0, 0, 0, 1, 0));
  p.joint_local.assign(joints, Vec3::Zero());
  p.joint_global.assign(joints, Vec3::Zero());
  return p;
}

Outcome metrics() {
  std::string notes;
  bool ok = true;

  // Four selected joints, one of them 5 cm off on every frame.
  eval::Directive d;
  d.frames.assign(8, blank_pose(4));
  d.mask.channels[static_cast<int>(Channel::kLocal)] = true;
  d.mask.joint_mask.assign(4, true);
  auto gen = d.frames;
  for (auto& p : gen) p.joint_local[2].x() += 0.05;
  const double mm = eval::mpjpe(gen, d);
  ok = ok && std::abs(mm - 12.5) < 1e-12;
  notes += fmt("mpjpe %.15g mm", mm);

  // 100-frame traces with n frames more than 1 m off on one joint.
  eval::Directive trace;
  trace.frames.assign(100, blank_pose(3));
  trace.mask = d.mask;
  trace.mask.joint_mask.assign(3, true);
  auto failing = [&](int n, double offset) {
    auto out = trace.frames;
    for (int t = 0; t < n; ++t) out[t * (100 / n)].joint_global[1].x() += offset;
    return out;
  };
  struct Case {
    int n;
    bool at10, at25;
  };
  for (const Case& c : {Case{0, true, true}, Case{5, true, true}, Case{9, true, true}, Case{10, false, true},
                        Case{15, false, true}, Case{24, false, true}, Case{25, false, false}, Case{40, false, false}}) {
    const auto g = c.n ? failing(c.n, 1.2) : trace.frames;
    const bool s10 = eval::success(g, trace, 0.10), s25 = eval::success(g, trace, 0.25);
    if (s10 != c.at10 || s25 != c.at25) {
      ok = false;
      notes += fmt("; %d failed frames gave %d/%d", c.n, int(s10), int(s25));
    }
  }
  // Exactly 1 m is not a failure.
  const double edge = eval::failed_frame_fraction(failing(50, 1.0), trace);
  ok = ok && edge == 0.0;
  ok = ok && eval::protocol_budget(eval::Protocol::kImitate) == 0.10 &&
       eval::protocol_budget(eval::Protocol::kCombine) == 0.10 &&
       eval::protocol_budget(eval::Protocol::kComplete) == 0.10 &&
       eval::protocol_budget(eval::Protocol::kCatchup) == 0.25;
  notes += "; budgets 0.10/0.25 at 0,5,9,10,15,24,25,40 failed frames of 100";
  return {ok, notes};
}

const Register r1(1, "reward-kernel", "tracking reward, gates, mask neutrality, energy", 10.0, reward_kernel);
const Register r2(2, "rotation-fk", "6D round trip and FK against a chain oracle", 5.0, rotation_fk);
const Register r7(7, "metrics", "MPJPE and success budgets on constructed traces", 0.0, metrics);

}  // namespace
}  // namespace mhc::acceptance
