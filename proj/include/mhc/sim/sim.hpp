#pragma once

#include "mhc/motion/pose.hpp"
#include "mhc/motion/skeleton.hpp"

#include <json.hpp>

#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace mhc::sim {

using motion::Pose;
using motion::SkeletonSpec;

struct SimConfig {
  int control_hz = 30;
  int sim_hz = 60;
  double kp = 60.0;            // N*m/rad
  double kd = 4.0;             // N*m*s/rad
  double torque_limit = 80.0;  // N*m, per component
  double joint_damping = 0.5;
  double joint_inertia = 0.1;
  double gravity = 9.81;
  double ground_height = 0.0;
  double fall_height_threshold = 0.3;
  double fall_tilt_threshold = 60.0 * std::numbers::pi / 180.0;
  double friction = 0.9;         // horizontal decay per body-contact substep
  double traction = 0.5;         // blend toward the planted-foot velocity per substep
  double stance_tolerance = 0.02;
  double support_radius = 0.2;   // COM offset beyond which stance stops righting
  double upright_stiffness = 60.0;
  double upright_damping = 12.0;
  double divergence_limit = 1e6;

  int substeps() const { return sim_hz / control_hz; }
  double control_dt() const { return 1.0 / control_hz; }
  /// Throws std::invalid_argument.
  void validate() const;
};

nlohmann::json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const nlohmann::json& j);

/// Joint set points a_t as exponential-map vectors, one per joint channel.
struct Action {
  std::vector<Vec3> setpoints;
};

struct SimState {
  Pose pose;
  std::vector<Vec3> joint_expmap;
  std::vector<Vec3> joint_vel;
  std::vector<Vec3> prev_action;
  double time = 0.0;
  bool fallen = false;
};

struct StepInfo {
  std::vector<Vec3> mean_torque;   // averaged over the substeps of this control step
  std::vector<Vec3> action;        // clamped set points that were applied
  std::vector<Vec3> prev_action;
  bool foot_contact = false;
  bool body_contact = false;
};

/// tau = clamp(kp * (setpoint - angle) - kd * vel, +-limit) per component.
Vec3 pd_torque(const Vec3& setpoint, const Vec3& angle, const Vec3& vel, double kp, double kd,
               double limit);

/// True iff root height < threshold or root tilt from vertical > threshold.
bool detect_fall(const Pose& pose, const SimConfig& cfg);

/// Least-squares planar root motion (vx, vy, yaw rate) that keeps the given
/// feet planted: minimises sum_i |v + w z x r_i + u_i|^2 + reg * w^2 where r_i is
/// the planar foot offset from the root and u_i its planar velocity relative
/// to the root.
Vec3 planted_foot_motion(std::span<const Vec2> foot_offsets, std::span<const Vec2> foot_rel_velocity,
                         double yaw_regularizer = 1e-2);

/// Indices (into `heights`) of points within `tolerance` of the lowest point
/// when that point touches the ground.
std::vector<int> contact_set(std::span<const double> heights, double ground, double tolerance);

class Simulator {
 public:
  Simulator(SkeletonSpec skel, SimConfig cfg);

  const SkeletonSpec& skeleton() const { return skel_; }
  const SimConfig& config() const { return cfg_; }

  /// Throws DegenerateRotation when the pose cannot be decoded.
  SimState reset(const Pose& initial) const;

  /// One control step (sim_hz / control_hz substeps of semi-implicit Euler).
  /// Throws NumericalDivergence if the state blows up.
  std::pair<SimState, StepInfo> step(const SimState& state, const Action& action) const;

  /// Clamps each set point to its joint limit; throws NumericalDivergence on
  /// non-finite input.
  Action clamp_action(const Action& action) const;

  /// Set points equal to the current joint angles.
  Action hold_action(const SimState& state) const;

 private:
  SkeletonSpec skel_;
  SimConfig cfg_;
};

}  // namespace mhc::sim
