#include "mhc/errors.hpp"
#include "mhc/motion/kinematics.hpp"
#include "mhc/sim/sim.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <numbers>

using namespace mhc;
using namespace mhc::sim;

namespace {

Pose standing(const motion::SkeletonSpec& skel) {
  Pose p = motion::rest_pose(skel.joint_count(), 0.9);
  motion::refresh_positions(skel, p);
  return p;
}

Rot6 tilted(double angle) {
  return motion::matrix_to_sixd(Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix());
}

}  // namespace

TEST_CASE("pd_torque") {
  const Vec3 z = Vec3::Zero();
  CHECK(pd_torque(Vec3(0.3, 0, 0), Vec3(0.3, 0, 0), z, 50, 2, 100).norm() == 0.0);
  CHECK(pd_torque(Vec3(0.2, 0, 0), z, Vec3(0.5, 0, 0), 50, 2, 100).x() == doctest::Approx(9.0));
  CHECK(pd_torque(Vec3(10, 0, 0), z, z, 50, 0, 100).x() == 100.0);
  CHECK(pd_torque(Vec3(-10, 0, 0), z, z, 50, 0, 100).x() == -100.0);
}

TEST_CASE("detect_fall thresholds") {
  const SimConfig cfg;
  const auto skel = motion::sim13();
  Pose p = standing(skel);
  CHECK_FALSE(detect_fall(p, cfg));
  p.root.position.z() = 0.2;
  CHECK(detect_fall(p, cfg));
  p.root.position.z() = 0.35;
  p.root.orientation = tilted(75.0 * std::numbers::pi / 180.0);
  CHECK(detect_fall(p, cfg));
  p.root.orientation = tilted(30.0 * std::numbers::pi / 180.0);
  CHECK_FALSE(detect_fall(p, cfg));
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.sim_hz = 45;
  CHECK_THROWS(cfg.validate());
  cfg = SimConfig{};
  cfg.kp = 0;
  CHECK_THROWS(cfg.validate());
  CHECK(SimConfig{}.substeps() == 2);
}

TEST_CASE("character at rest stays at rest") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  auto s = sim.reset(standing(skel));
  CHECK_FALSE(s.fallen);
  const auto start = s;
  for (int k = 0; k < 30; ++k) s = sim.step(s, sim.hold_action(s)).first;
  CHECK(s.time == doctest::Approx(1.0));
  CHECK((s.pose.root.position - start.pose.root.position).norm() < 1e-9);
  CHECK((s.pose.root.rotation() - start.pose.root.rotation()).norm() < 1e-9);
  CHECK(s.pose.root.linear_velocity.norm() < 1e-9);
  for (int c = 0; c < skel.joint_count(); ++c) CHECK(s.joint_expmap[c].norm() < 1e-12);
}

TEST_CASE("each control step advances time by exactly one control period") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  auto s = sim.reset(standing(skel));
  const double t0 = s.time;
  s = sim.step(s, sim.hold_action(s)).first;
  CHECK(s.time - t0 == 1.0 / 30.0);
}

TEST_CASE("dropped character lands without penetrating the ground") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  Pose p = standing(skel);
  p.root.position.z() = 1.0;
  auto s = sim.reset(p);
  double prev = s.pose.height();
  bool descended = false;
  for (int k = 0; k < 30; ++k) {
    s = sim.step(s, sim.hold_action(s)).first;
    if (s.pose.height() < prev - 1e-6) descended = true;
    prev = s.pose.height();
    double lowest = s.pose.height();
    for (const auto& g : s.pose.joint_global) lowest = std::min(lowest, g.z());
    CHECK(lowest >= -1e-9);
  }
  CHECK(descended);
  CHECK(s.pose.height() == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("ground non-penetration under random actions") {
  std::mt19937_64 rng(4);
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  auto s = sim.reset(standing(skel));
  std::normal_distribution<double> n(0.0, 0.6);
  for (int k = 0; k < 150; ++k) {
    Action a;
    for (int c = 0; c < skel.joint_count(); ++c) a.setpoints.emplace_back(n(rng), n(rng), n(rng));
    s = sim.step(s, a).first;
    CHECK(s.pose.height() >= -1e-9);
    for (const auto& g : s.pose.joint_global) CHECK(g.z() >= -1e-9);
    CHECK(motion::fk_consistency_error(skel, s.pose) < 1e-6);
    CHECK(s.fallen == detect_fall(s.pose, sim.config()));
  }
}

TEST_CASE("stepping is deterministic") {
  std::mt19937_64 rng(8);
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<Action> actions(60);
  for (auto& a : actions)
    for (int c = 0; c < skel.joint_count(); ++c) a.setpoints.emplace_back(n(rng), n(rng), n(rng));
  auto run = [&] {
    auto s = sim.reset(standing(skel));
    for (const auto& a : actions) s = sim.step(s, a).first;
    return s;
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.pose.root.position == b.pose.root.position);
  CHECK(a.pose.root.orientation == b.pose.root.orientation);
  CHECK(a.joint_expmap == b.joint_expmap);
  CHECK(a.pose.joint_global == b.pose.joint_global);
}

TEST_CASE("holding the current angles does not drift") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  Pose p = standing(skel);
  p.joint_rot[skel.channel_of("right_elbow")] = motion::matrix_to_sixd(motion::expmap_to_matrix(Vec3(0, 0.6, 0)));
  p.joint_rot[skel.channel_of("left_shoulder")] = motion::matrix_to_sixd(motion::expmap_to_matrix(Vec3(0.3, 0, 0)));
  motion::refresh_positions(skel, p);
  auto s = sim.reset(p);
  const auto start = s.joint_expmap;
  const Action hold = sim.hold_action(s);
  for (int k = 0; k < 30; ++k) s = sim.step(s, hold).first;
  for (int c = 0; c < skel.joint_count(); ++c) CHECK((s.joint_expmap[c] - start[c]).norm() < 1e-3);
}

TEST_CASE("a 0.5 rad step settles quickly without large overshoot") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  auto s = sim.reset(standing(skel));
  const int elbow = skel.channel_of("right_elbow");
  Action a = sim.hold_action(s);
  a.setpoints[elbow] = Vec3(0, 0.5, 0);
  double peak = 0.0;
  for (int k = 0; k < 30; ++k) {
    s = sim.step(s, a).first;
    peak = std::max(peak, s.joint_expmap[elbow].y());
    if (k + 1 == 9) CHECK(std::abs(s.joint_expmap[elbow].y() - 0.5) < 0.05 * 0.5);  // 0.3 s
  }
  CHECK(peak <= 0.5 * 1.2);
  CHECK(s.joint_expmap[elbow].y() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("passive joint kinetic energy does not increase") {
  const auto skel = motion::sim13();
  SimConfig cfg;
  cfg.kp = 1e-12;
  cfg.kd = 1e-12;
  const Simulator sim(skel, cfg);
  auto s = sim.reset(standing(skel));
  for (auto& v : s.joint_vel) v = Vec3(0.4, -0.2, 0.1);
  auto energy = [](const SimState& st) {
    double e = 0;
    for (const auto& v : st.joint_vel) e += v.squaredNorm();
    return e;
  };
  double prev = energy(s);
  for (int k = 0; k < 30; ++k) {
    s = sim.step(s, sim.hold_action(s)).first;
    const double e = energy(s);
    CHECK(e <= prev + 1e-15);
    prev = e;
  }
}

TEST_CASE("an unsupported lean topples within about a second") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  Pose p = standing(skel);
  p.root.orientation = tilted(0.5);
  motion::refresh_positions(skel, p);
  auto s = sim.reset(p);
  int steps = 0;
  while (!s.fallen && steps < 60) {
    s = sim.step(s, sim.hold_action(s)).first;
    ++steps;
  }
  CHECK(s.fallen);
  CHECK(steps <= 45);
}

TEST_CASE("a small lean is righted while standing") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  Pose p = standing(skel);
  p.root.orientation = tilted(0.08);
  motion::refresh_positions(skel, p);
  auto s = sim.reset(p);
  for (int k = 0; k < 60; ++k) s = sim.step(s, sim.hold_action(s)).first;
  CHECK_FALSE(s.fallen);
  CHECK(motion::tilt_angle(s.pose.root.rotation()) < 0.03);
}

TEST_CASE("reset from a fallen pose reports fallen") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  Pose p = standing(skel);
  p.root.position.z() = 0.15;
  p.root.orientation = tilted(std::numbers::pi / 2);
  motion::refresh_positions(skel, p);
  const auto a = sim.reset(p);
  const auto b = sim.reset(p);
  CHECK(a.fallen);
  CHECK(a.joint_expmap == b.joint_expmap);
  CHECK(a.prev_action == a.joint_expmap);
  CHECK(a.time == 0.0);
}

TEST_CASE("planted foot moving back drives the root forward") {
  std::vector<Vec2> offsets = {Vec2(0.0, 0.1)};
  std::vector<Vec2> rel = {Vec2(-1.0, 0.0)};
  const Vec3 m = planted_foot_motion(offsets, rel);
  CHECK(m.x() > 0.9);
  CHECK(std::abs(m.y()) < 0.1);
  CHECK(planted_foot_motion({}, {}).norm() == 0.0);
}

TEST_CASE("non-finite actions and divergence are reported") {
  const auto skel = motion::sim13();
  const Simulator sim(skel, SimConfig{});
  auto s = sim.reset(standing(skel));
  Action a = sim.hold_action(s);
  a.setpoints[0].x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sim.step(s, a), NumericalDivergence);
  s.pose.root.linear_velocity = Vec3(1e8, 0, 0);
  CHECK_THROWS_AS(sim.step(s, sim.hold_action(s)), NumericalDivergence);
}
