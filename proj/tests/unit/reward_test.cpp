#include "mhc/directive/episode.hpp"
#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"
#include "mhc/reward/reward.hpp"
#include "test_util.hpp"

#include <Eigen/Geometry>
#include <doctest.h>

#include <numbers>

using namespace mhc;
using namespace mhc::reward;
using directive::channel_mask_from_menu;
using directive::Channel;

namespace {

constexpr int kJ = 14;

Pose random_pose(std::mt19937_64& rng, double spread = 1.0) {
  Pose p = motion::rest_pose(kJ, 0.9);
  p.root.position = test::random_vec3(rng, spread);
  p.root.orientation = test::random_rot6(rng);
  p.root.linear_velocity = test::random_vec3(rng, spread);
  p.root.angular_velocity = test::random_vec3(rng, spread);
  for (auto& r : p.joint_rot) r = test::random_rot6(rng);
  p.joint_local.resize(kJ);
  p.joint_global.resize(kJ);
  for (auto& l : p.joint_local) l = test::random_vec3(rng, spread);
  for (auto& g : p.joint_global) g = test::random_vec3(rng, spread);
  return p;
}

// Small perturbation so that gates pass some of the time.
Pose nearby(const Pose& p, std::mt19937_64& rng, double eps) {
  Pose q = p;
  q.root.position += test::random_vec3(rng, eps);
  const Mat3 R = Eigen::AngleAxisd(eps, test::random_vec3(rng).normalized()).toRotationMatrix() * p.root.rotation();
  q.root.orientation = motion::matrix_to_sixd(R);
  q.root.linear_velocity += test::random_vec3(rng, eps);
  q.root.angular_velocity += test::random_vec3(rng, eps);
  for (auto& l : q.joint_local) l += test::random_vec3(rng, eps * 0.1);
  for (auto& g : q.joint_global) g += test::random_vec3(rng, eps * 0.1);
  return q;
}

directive::DirectiveMask empty_mask() {
  directive::DirectiveMask m;
  m.joint_mask.assign(kJ, false);
  return m;
}

// Independent evaluation written straight from the reward definition.
TrackingTerms oracle(const Pose& p, const Pose& t, const directive::DirectiveMask& m) {
  const double mh = m.root_field(directive::RootField::kHeight);
  const double mo = m.root_field(directive::RootField::kOrientation);
  const double mv = m.root_field(directive::RootField::kVelocity);
  TrackingTerms r;
  r.r_h = std::exp(-mh * 8.0 * std::abs(p.root.position.z() - t.root.position.z()));
  const Eigen::Quaterniond qa(p.root.rotation()), qb(t.root.rotation());
  const double ang = 2.0 * std::atan2((qa.conjugate() * qb).vec().norm(), std::abs((qa.conjugate() * qb).w()));
  r.r_o = (r.r_h > 0.9) ? std::exp(-mo * ang) : 0.0;
  const Vec3 dv(p.root.linear_velocity.x() - t.root.linear_velocity.x(),
                p.root.linear_velocity.y() - t.root.linear_velocity.y(),
                p.root.angular_velocity.z() - t.root.angular_velocity.z());
  r.r_v = (r.r_o > 0.9) ? std::exp(-mv * dv.norm()) : 0.0;
  double s = 0.0, n = 0.0;
  for (int c = 0; c < kJ; ++c) {
    const bool sel = (m.has(Channel::kLocal) || m.has(Channel::kGlobal)) && m.joint_mask[c];
    if (!sel) continue;
    const Vec3 e = m.has(Channel::kLocal) ? Vec3(p.joint_local[c] - t.joint_local[c])
                                          : Vec3(p.joint_global[c] - t.joint_global[c]);
    s += std::exp(-40.0 * e.norm());
    n += 1.0;
  }
  r.r_l = (r.r_v > 0.9) ? (n > 0 ? s / n : 1.0) : 0.0;
  return r;
}

}  // namespace

TEST_CASE("perfect tracking") {
  std::mt19937_64 rng(1);
  const Pose p = random_pose(rng);
  auto m = channel_mask_from_menu(0, kJ);
  m.channels[static_cast<int>(Channel::kGlobal)] = true;
  const auto r = tracking_reward(p, p, m);
  CHECK(r.r_h == 1.0);
  CHECK(r.r_o == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.r_v == 1.0);
  CHECK(r.r_l == 1.0);
  CHECK(r.sum() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("height error fails every later gate") {
  std::mt19937_64 rng(2);
  const Pose p = random_pose(rng);
  Pose t = p;
  t.root.position.z() += 0.1;
  const auto r = tracking_reward(p, t, channel_mask_from_menu(0, kJ));
  CHECK(r.r_h == doctest::Approx(std::exp(-0.8)).epsilon(1e-14));
  CHECK(r.r_h == doctest::Approx(0.4493).epsilon(1e-4));
  CHECK(r.r_o == 0.0);
  CHECK(r.r_v == 0.0);
  CHECK(r.r_l == 0.0);
}

TEST_CASE("nothing selected gives full reward") {
  std::mt19937_64 rng(3);
  const auto r = tracking_reward(random_pose(rng), random_pose(rng), empty_mask());
  CHECK(r.r_h == 1.0);
  CHECK(r.r_o == 1.0);
  CHECK(r.r_v == 1.0);
  CHECK(r.r_l == 1.0);
}

TEST_CASE("tracking reward matches the oracle and respects gates") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> eps(0.0, 0.15);
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  int passed_all = 0;
  for (int i = 0; i < 4000; ++i) {
    auto m = channel_mask_from_menu(i % directive::kChannelMenuSize, kJ);
    if (i % 2) m = directive::compose_joint_mask(m, directive::joint_mask_for_percentage(pct(rng), kJ, rng));
    if (i % 7 == 0) m.channels[static_cast<int>(Channel::kGlobal)] = m.has(Channel::kLocal);
    const Pose p = random_pose(rng);
    const Pose t = (i % 5 == 0) ? random_pose(rng) : nearby(p, rng, eps(rng));
    const auto r = tracking_reward(p, t, m);
    const auto o = oracle(p, t, m);
    CHECK(r.r_h == doctest::Approx(o.r_h).epsilon(1e-12));
    CHECK(r.r_o == doctest::Approx(o.r_o).epsilon(1e-9));
    CHECK(r.r_v == doctest::Approx(o.r_v).epsilon(1e-12));
    CHECK(r.r_l == doctest::Approx(o.r_l).epsilon(1e-12));
    if (r.r_h <= 0.9) CHECK(r.r_o == 0.0);
    if (r.r_o <= 0.9) CHECK(r.r_v == 0.0);
    if (r.r_v <= 0.9) CHECK(r.r_l == 0.0);
    for (double v : {r.r_h, r.r_o, r.r_v, r.r_l}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    passed_all += r.r_l > 0.0;
  }
  // The fuzz must exercise every gate.
  CHECK(passed_all > 100);
}

TEST_CASE("unselected target values never change the reward") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    auto m = channel_mask_from_menu(i % directive::kChannelMenuSize, kJ);
    if (m.position_channel()) m = directive::compose_joint_mask(m, directive::joint_mask_for_percentage(50, kJ, rng));
    const Pose p = random_pose(rng);
    const Pose t = nearby(p, rng, 0.02);
    Pose f = t;
    const Pose noise = random_pose(rng, 3.0);
    if (!m.root_field(directive::RootField::kHeight)) f.root.position.z() = noise.root.position.z();
    f.root.position.head<2>() = noise.root.position.head<2>();
    if (!m.root_field(directive::RootField::kOrientation)) f.root.orientation = noise.root.orientation;
    if (!m.root_field(directive::RootField::kVelocity)) {
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
    const auto a = tracking_reward(p, t, m), b = tracking_reward(p, f, m);
    CHECK(a.r_h == b.r_h);
    CHECK(a.r_o == b.r_o);
    CHECK(a.r_v == b.r_v);
    CHECK(a.r_l == b.r_l);
  }
}

TEST_CASE("tracking reward is invariant to a shared in-plane rotation") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  auto m = channel_mask_from_menu(0, kJ);
  for (int i = 0; i < 300; ++i) {
    const Pose p = random_pose(rng);
    const Pose t = nearby(p, rng, 0.03);
    const double a = ang(rng);
    const Vec2 pivot = test::random_vec3(rng, 2.0).head<2>();
    const auto r0 = tracking_reward(p, t, m);
    const auto r1 = tracking_reward(motion::rotate_pose_inplane(p, a, pivot), motion::rotate_pose_inplane(t, a, pivot), m);
    CHECK(r1.sum() == doctest::Approx(r0.sum()).epsilon(1e-9));
  }
}

TEST_CASE("energy cost") {
  std::vector<Vec3> a{Vec3(0.1, 0.2, 0.3)}, z{Vec3::Zero()};
  CHECK(energy_cost(a, a, z) == 0.0);
  // |da|_1 = 0.3 + 0.1 + 0.1 = 0.5, |tau|_1 = 10
  std::vector<Vec3> a1{Vec3(0.3, -0.1, 0.1)}, a0{Vec3::Zero()}, tau{Vec3(4.0, -5.0, 1.0)};
  CHECK(energy_cost(a1, a0, tau) == doctest::Approx(0.007).epsilon(1e-12));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    std::vector<Vec3> x(kJ), y(kJ), t(kJ);
    for (int c = 0; c < kJ; ++c) {
      x[c] = test::random_vec3(rng, 3.0);
      y[c] = test::random_vec3(rng, 3.0);
      t[c] = test::random_vec3(rng, 80.0);
    }
    CHECK(energy_cost(x, y, t) >= 0.0);
  }
  CHECK_THROWS_AS(energy_cost(a, {}, z), ShapeMismatch);
}

TEST_CASE("total reward arithmetic") {
  CHECK(total_reward(4.0, 2.0, 0.0) == 3.0);
  CHECK(total_reward(0.4493, 0.0, 0.007) == doctest::Approx(0.2177).epsilon(1e-4));
  CHECK(total_reward(0.0, 0.0, 0.0) == 0.0);
  TrackingTerms tr{1.0, 1.0, 0.5, 0.25};
  const auto b = compose(tr, {0.7, 0.7, 0.7, 0.7, 0.7}, 0.01);
  CHECK(b.r_tr == 2.75);
  CHECK(b.r_st == doctest::Approx(0.7));
  CHECK(b.total == doctest::Approx(0.5 * 2.75 + 0.35 - 0.01));
  CHECK(breakdown_values(b).size() == breakdown_columns().size());
}

TEST_CASE("tracking config validation") {
  TrackingConfig c;
  CHECK_NOTHROW(c.validate());
  c.gate_threshold = 1.0;
  CHECK_THROWS(c.validate());
  const auto back = tracking_config_from_json(to_json(TrackingConfig{}));
  CHECK(back.joint_scale == 40.0);
}
