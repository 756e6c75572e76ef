#pragma once

#include "mhc/directive/directive.hpp"

#include <json.hpp>

#include <array>
#include <string>
#include <vector>

namespace mhc::reward {

using directive::DirectiveMask;
using motion::Pose;

struct TrackingConfig {
  double gate_threshold = 0.9;
  double height_scale = 8.0;
  double joint_scale = 40.0;
  double tracking_weight = 0.5;
  double style_weight = 0.5;
  double action_delta_coeff = 0.01;
  double torque_coeff = 0.0002;

  /// Throws std::invalid_argument.
  void validate() const;
};

nlohmann::json to_json(const TrackingConfig& cfg);
TrackingConfig tracking_config_from_json(const nlohmann::json& j);

struct TrackingTerms {
  double r_h = 0.0, r_o = 0.0, r_v = 0.0, r_l = 0.0;
  double sum() const { return r_h + r_o + r_v + r_l; }
};

struct RewardBreakdown {
  double r_h = 0.0, r_o = 0.0, r_v = 0.0, r_l = 0.0;
  double r_tr = 0.0;
  std::array<double, 5> style_parts{};
  double r_st = 0.0;
  double energy = 0.0;
  double total = 0.0;
};

/// Per-term mask flags m_h, m_o, m_v.
struct MaskFlags {
  bool height = false, orientation = false, velocity = false;
};
MaskFlags mask_flags(const DirectiveMask& mask);

/// Prioritised tracking terms; each term is gated on the previous one
/// exceeding the threshold. Joint errors use q^l when L is selected and q^g
/// when only G is, averaged over selected joints only.
TrackingTerms tracking_reward(const Pose& pose, const Pose& target, const DirectiveMask& mask,
                              const TrackingConfig& cfg = {});

/// Planar root velocity and yaw rate.
Vec3 root_velocity_term(const Pose& pose);

double energy_cost(const std::vector<Vec3>& action, const std::vector<Vec3>& prev_action,
                   const std::vector<Vec3>& torques, const TrackingConfig& cfg = {});

double total_reward(double r_tr, double r_st, double energy, const TrackingConfig& cfg = {});

/// Fills r_tr and total from the other fields.
RewardBreakdown compose(const TrackingTerms& tr, const std::array<double, 5>& style_parts, double energy,
                        const TrackingConfig& cfg = {});

const std::vector<std::string>& breakdown_columns();
std::vector<double> breakdown_values(const RewardBreakdown& b);

}  // namespace mhc::reward
