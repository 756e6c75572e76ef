#include "mhc/sim/sim.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/kinematics.hpp"
#include "mhc/motion/rotation.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mhc::sim {

using motion::expmap_to_matrix;
using motion::matrix_to_expmap;
using motion::sixd_to_matrix;

void SimConfig::validate() const {
  if (control_hz <= 0 || sim_hz <= 0 || sim_hz % control_hz != 0)
    throw std::invalid_argument("sim_hz must be a positive integer multiple of control_hz");
  if (!(kp > 0 && kd > 0 && torque_limit > 0))
    throw std::invalid_argument("kp, kd and torque_limit must be positive");
  if (!(joint_inertia > 0 && joint_damping >= 0))
    throw std::invalid_argument("joint inertia must be positive and damping non-negative");
}

nlohmann::json to_json(const SimConfig& c) {
  return {{"control_hz", c.control_hz},
          {"sim_hz", c.sim_hz},
          {"kp", c.kp},
          {"kd", c.kd},
          {"torque_limit", c.torque_limit},
          {"joint_damping", c.joint_damping},
          {"joint_inertia", c.joint_inertia},
          {"gravity", c.gravity},
          {"ground_height", c.ground_height},
          {"fall_height_threshold", c.fall_height_threshold},
          {"fall_tilt_threshold", c.fall_tilt_threshold},
          {"friction", c.friction},
          {"traction", c.traction},
          {"stance_tolerance", c.stance_tolerance},
          {"support_radius", c.support_radius},
          {"upright_stiffness", c.upright_stiffness},
          {"upright_damping", c.upright_damping}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  c.control_hz = j.value("control_hz", c.control_hz);
  c.sim_hz = j.value("sim_hz", c.sim_hz);
  c.kp = j.value("kp", c.kp);
  c.kd = j.value("kd", c.kd);
  c.torque_limit = j.value("torque_limit", c.torque_limit);
  c.joint_damping = j.value("joint_damping", c.joint_damping);
  c.joint_inertia = j.value("joint_inertia", c.joint_inertia);
  c.gravity = j.value("gravity", c.gravity);
  c.ground_height = j.value("ground_height", c.ground_height);
  c.fall_height_threshold = j.value("fall_height_threshold", c.fall_height_threshold);
  c.fall_tilt_threshold = j.value("fall_tilt_threshold", c.fall_tilt_threshold);
  c.friction = j.value("friction", c.friction);
  c.traction = j.value("traction", c.traction);
  c.stance_tolerance = j.value("stance_tolerance", c.stance_tolerance);
  c.support_radius = j.value("support_radius", c.support_radius);
  c.upright_stiffness = j.value("upright_stiffness", c.upright_stiffness);
  c.upright_damping = j.value("upright_damping", c.upright_damping);
  c.validate();
  return c;
}

Vec3 pd_torque(const Vec3& setpoint, const Vec3& angle, const Vec3& vel, double kp, double kd,
               double limit) {
  const Vec3 tau = kp * (setpoint - angle) - kd * vel;
  return tau.cwiseMax(-limit).cwiseMin(limit);
}

bool detect_fall(const Pose& pose, const SimConfig& cfg) {
  if (pose.height() < cfg.fall_height_threshold) return true;
  return motion::tilt_angle(pose.root.rotation()) > cfg.fall_tilt_threshold;
}

Vec3 planted_foot_motion(std::span<const Vec2> foot_offsets, std::span<const Vec2> foot_rel_velocity,
                         double yaw_regularizer) {
  Mat3 ata = Mat3::Zero();
  Vec3 atb = Vec3::Zero();
  for (std::size_t i = 0; i < foot_offsets.size(); ++i) {
    const Vec2& r = foot_offsets[i];
    const Vec2& u = foot_rel_velocity[i];
    const Vec3 row_x(1.0, 0.0, -r.y());
    const Vec3 row_y(0.0, 1.0, r.x());
    ata += row_x * row_x.transpose() + row_y * row_y.transpose();
    atb += row_x * (-u.x()) + row_y * (-u.y());
  }
  ata(2, 2) += yaw_regularizer;
  if (foot_offsets.empty()) return Vec3::Zero();
  return ata.ldlt().solve(atb);
}

std::vector<int> contact_set(std::span<const double> heights, double ground, double tolerance) {
  std::vector<int> out;
  if (heights.empty()) return out;
  const double lowest = *std::min_element(heights.begin(), heights.end());
  if (lowest > ground + tolerance) return out;
  const double cutoff = std::max(lowest, ground) + tolerance;
  for (std::size_t i = 0; i < heights.size(); ++i)
    if (heights[i] <= cutoff) out.push_back(static_cast<int>(i));
  return out;
}

Simulator::Simulator(SkeletonSpec skel, SimConfig cfg) : skel_(std::move(skel)), cfg_(cfg) {
  cfg_.validate();
}

SimState Simulator::reset(const Pose& initial) const {
  const int n = skel_.joint_count();
  if (initial.joint_count() != n) throw ShapeMismatch("reset: pose joint count does not match skeleton");
  SimState s;
  s.pose = initial;
  // Round-trip the root through the decoder so the stored 6D is orthonormal.
  const Mat3 root_rot = sixd_to_matrix(initial.root.orientation);
  s.pose.root.orientation.head<3>() = root_rot.col(0);
  s.pose.root.orientation.tail<3>() = root_rot.col(1);
  s.joint_expmap.resize(n);
  s.joint_vel.assign(n, Vec3::Zero());
  for (int c = 0; c < n; ++c) s.joint_expmap[c] = matrix_to_expmap(sixd_to_matrix(initial.joint_rot[c]));
  motion::refresh_positions(skel_, s.pose);
  s.prev_action = s.joint_expmap;
  s.time = 0.0;
  s.fallen = detect_fall(s.pose, cfg_);
  return s;
}

Action Simulator::clamp_action(const Action& action) const {
  const int n = skel_.joint_count();
  if (static_cast<int>(action.setpoints.size()) != n)
    throw ShapeMismatch("action size does not match skeleton");
  Action out = action;
  for (int c = 0; c < n; ++c) {
    Vec3& a = out.setpoints[c];
    if (!a.allFinite()) throw NumericalDivergence("non-finite action");
    const double limit = skel_.channel_joint(c).limit;
    const double mag = a.norm();
    if (mag > limit) a *= limit / mag;
  }
  return out;
}

Action Simulator::hold_action(const SimState& state) const { return Action{state.joint_expmap}; }

namespace {

void check_finite(const Vec3& v, double limit, const char* what) {
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > limit)
    throw NumericalDivergence(std::string("simulation diverged: ") + what);
}

}  // namespace

std::pair<SimState, StepInfo> Simulator::step(const SimState& state, const Action& action) const {
  const int n = skel_.joint_count();
  const Action act = clamp_action(action);
  const double dt = 1.0 / cfg_.sim_hz;
  const int substeps = cfg_.substeps();
  const auto& feet = skel_.foot_channels();

  SimState next = state;
  Vec3 p = state.pose.root.position;
  Mat3 rot = sixd_to_matrix(state.pose.root.orientation);
  Vec3 v = state.pose.root.linear_velocity;
  Vec3 w = state.pose.root.angular_velocity;
  auto& ang = next.joint_expmap;
  auto& vel = next.joint_vel;

  std::vector<Mat3> local(n);
  for (int c = 0; c < n; ++c) local[c] = expmap_to_matrix(ang[c]);
  std::vector<Vec3> rel_prev(n);
  {
    const auto fk = motion::forward_kinematics(skel_, p, rot, local);
    for (int c = 0; c < n; ++c) rel_prev[c] = fk.global[c] - p;
  }

  StepInfo info;
  info.mean_torque.assign(n, Vec3::Zero());
  std::vector<double> heights(n + 1);
  std::vector<Vec2> foot_offsets, foot_vel;

  for (int s = 0; s < substeps; ++s) {
    // Independent damped joints under PD actuation.
    for (int c = 0; c < n; ++c) {
      const Vec3 tau = pd_torque(act.setpoints[c], ang[c], vel[c], cfg_.kp, cfg_.kd, cfg_.torque_limit);
      info.mean_torque[c] += tau;
      vel[c] += dt * (tau - cfg_.joint_damping * vel[c]) / cfg_.joint_inertia;
      ang[c] += dt * vel[c];
      const double limit = skel_.channel_joint(c).limit;
      const double mag = ang[c].norm();
      if (mag > limit) {
        ang[c] *= limit / mag;
        vel[c].setZero();
      }
      local[c] = expmap_to_matrix(ang[c]);
    }
    const auto fk = motion::forward_kinematics(skel_, p, rot, local);

    heights[0] = p.z();
    for (int c = 0; c < n; ++c) heights[c + 1] = fk.global[c].z();
    const auto contacts = contact_set(heights, cfg_.ground_height, cfg_.stance_tolerance);

    foot_offsets.clear();
    foot_vel.clear();
    Vec2 stance_centre = Vec2::Zero();
    bool body_contact = false;
    Vec2 contact_centre = Vec2::Zero();
    for (int idx : contacts) {
      const Vec3 point = idx == 0 ? p : fk.global[idx - 1];
      contact_centre += point.head<2>();
      const int c = idx - 1;
      if (c >= 0 && std::find(feet.begin(), feet.end(), c) != feet.end()) {
        const Vec3 rel = fk.global[c] - p;
        foot_offsets.push_back(rel.head<2>());
        foot_vel.push_back(((rel - rel_prev[c]) / dt).head<2>());
        stance_centre += point.head<2>();
      } else {
        body_contact = true;
      }
    }
    const bool stance = !foot_offsets.empty();
    if (stance) stance_centre /= static_cast<double>(foot_offsets.size());
    if (!contacts.empty()) contact_centre /= static_cast<double>(contacts.size());
    info.foot_contact = info.foot_contact || stance;
    info.body_contact = info.body_contact || body_contact;

    // Planar root motion: planted feet drive the root, otherwise friction.
    if (stance) {
      const Vec3 target = planted_foot_motion(foot_offsets, foot_vel);
      v.x() += cfg_.traction * (target.x() - v.x());
      v.y() += cfg_.traction * (target.y() - v.y());
      w.z() += cfg_.traction * (target.z() - w.z());
    } else if (body_contact) {
      v.x() *= cfg_.friction;
      v.y() *= cfg_.friction;
      w.z() *= cfg_.friction;
    }
    v.z() -= cfg_.gravity * dt;

    // Tilt: inverted pendulum about the support, righted while the centre of
    // mass stays over the stance feet.
    if (!contacts.empty()) {
      const Vec2 support = stance ? stance_centre : contact_centre;
      const Vec3 com = motion::centre_of_mass(p, fk.global);
      const Vec3 r(com.x() - support.x(), com.y() - support.y(), com.z() - cfg_.ground_height);
      const double denom = std::max(r.squaredNorm(), 0.05);
      Vec3 alpha = cfg_.gravity * Vec3(-r.y(), r.x(), 0.0) / denom;
      if (stance && (com.head<2>() - support).norm() < cfg_.support_radius) {
        const Vec3 up = rot.col(2);
        alpha += cfg_.upright_stiffness * up.cross(Vec3::UnitZ());
        alpha -= cfg_.upright_damping * Vec3(w.x(), w.y(), 0.0);
      }
      w.x() += dt * alpha.x();
      w.y() += dt * alpha.y();
      if (body_contact) {
        w.x() *= cfg_.friction;
        w.y() *= cfg_.friction;
      }
    }
    // A body lying on the ground does not roll past face-down.
    const Vec3 up = rot.col(2);
    if (motion::tilt_angle(rot) > 0.5 * std::numbers::pi + 0.2 && w.cross(up).z() < 0.0) {
      w.x() = 0.0;
      w.y() = 0.0;
    }

    p += dt * v;
    const Mat3 turned = expmap_to_matrix(dt * w) * rot;
    Rot6 r6;
    r6.head<3>() = turned.col(0);
    r6.tail<3>() = turned.col(1);
    rot = sixd_to_matrix(r6);

    // Inelastic ground contact: nothing below the ground, no downward speed.
    const auto fk_after = motion::forward_kinematics(skel_, p, rot, local);
    double lowest = p.z();
    for (int c = 0; c < n; ++c) {
      rel_prev[c] = fk_after.global[c] - p;
      lowest = std::min(lowest, fk_after.global[c].z());
    }
    if (lowest < cfg_.ground_height) {
      p.z() += cfg_.ground_height - lowest;
      v.z() = std::max(v.z(), 0.0);
    }

    const double lim = cfg_.divergence_limit;
    check_finite(p, lim, "root position");
    check_finite(v, lim, "root velocity");
    check_finite(w, lim, "root angular velocity");
    for (int c = 0; c < n; ++c) check_finite(vel[c], lim, "joint velocity");
  }

  for (auto& t : info.mean_torque) t /= static_cast<double>(substeps);
  info.action = act.setpoints;
  info.prev_action = state.prev_action;

  auto& pose = next.pose;
  pose.root.position = p;
  pose.root.orientation.head<3>() = rot.col(0);
  pose.root.orientation.tail<3>() = rot.col(1);
  pose.root.linear_velocity = v;
  pose.root.angular_velocity = w;
  for (int c = 0; c < n; ++c) {
    const Mat3& m = local[c];
    pose.joint_rot[c].head<3>() = m.col(0);
    pose.joint_rot[c].tail<3>() = m.col(1);
  }
  motion::refresh_positions(skel_, pose);
  next.prev_action = act.setpoints;
  next.time = state.time + cfg_.control_dt();
  next.fallen = detect_fall(pose, cfg_);
  return {std::move(next), std::move(info)};
}

}  // namespace mhc::sim
