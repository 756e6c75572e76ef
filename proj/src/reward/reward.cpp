#include "mhc/reward/reward.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/rotation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mhc::reward {

using directive::Channel;
using directive::RootField;

void TrackingConfig::validate() const {
  if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) throw std::invalid_argument("gate_threshold outside (0,1)");
  if (!(height_scale > 0.0 && joint_scale > 0.0)) throw std::invalid_argument("reward scales must be positive");
  if (!(action_delta_coeff >= 0.0 && torque_coeff >= 0.0)) throw std::invalid_argument("energy coefficients must be >= 0");
}

nlohmann::json to_json(const TrackingConfig& c) {
  return {{"gate_threshold", c.gate_threshold}, {"height_scale", c.height_scale},
          {"joint_scale", c.joint_scale},       {"tracking_weight", c.tracking_weight},
          {"style_weight", c.style_weight},     {"action_delta_coeff", c.action_delta_coeff},
          {"torque_coeff", c.torque_coeff}};
}

TrackingConfig tracking_config_from_json(const nlohmann::json& j) {
  TrackingConfig c;
  c.gate_threshold = j.value("gate_threshold", c.gate_threshold);
  c.height_scale = j.value("height_scale", c.height_scale);
  c.joint_scale = j.value("joint_scale", c.joint_scale);
  c.tracking_weight = j.value("tracking_weight", c.tracking_weight);
  c.style_weight = j.value("style_weight", c.style_weight);
  c.action_delta_coeff = j.value("action_delta_coeff", c.action_delta_coeff);
  c.torque_coeff = j.value("torque_coeff", c.torque_coeff);
  c.validate();
  return c;
}

MaskFlags mask_flags(const DirectiveMask& m) {
  return {m.root_field(RootField::kHeight), m.root_field(RootField::kOrientation),
          m.root_field(RootField::kVelocity)};
}

Vec3 root_velocity_term(const Pose& p) {
  return Vec3(p.root.linear_velocity.x(), p.root.linear_velocity.y(), p.root.angular_velocity.z());
}

TrackingTerms tracking_reward(const Pose& pose, const Pose& target, const DirectiveMask& mask,
                              const TrackingConfig& cfg) {
  const MaskFlags m = mask_flags(mask);
  TrackingTerms r;
  const double dh = m.height ? std::abs(pose.height() - target.height()) : 0.0;
  r.r_h = std::exp(-cfg.height_scale * dh);
  if (r.r_h > cfg.gate_threshold) {
    const double d = m.orientation ? motion::geodesic_angle(pose.root.rotation(), target.root.rotation()) : 0.0;
    r.r_o = std::exp(-d);
  }
  if (r.r_o > cfg.gate_threshold) {
    const double dv = m.velocity ? (root_velocity_term(pose) - root_velocity_term(target)).norm() : 0.0;
    r.r_v = std::exp(-dv);
  }
  if (r.r_v > cfg.gate_threshold) {
    const bool local = mask.has(Channel::kLocal);
    const auto& q = local ? pose.joint_local : pose.joint_global;
    const auto& qt = local ? target.joint_local : target.joint_global;
    double sum = 0.0;
    int n = 0;
    for (int c = 0; c < pose.joint_count(); ++c) {
      if (!mask.joint_selected(c)) continue;
      sum += std::exp(-cfg.joint_scale * (q[c] - qt[c]).norm());
      ++n;
    }
    r.r_l = n == 0 ? 1.0 : sum / n;
  }
  return r;
}

double energy_cost(const std::vector<Vec3>& action, const std::vector<Vec3>& prev_action,
                   const std::vector<Vec3>& torques, const TrackingConfig& cfg) {
  if (action.size() != prev_action.size() || action.size() != torques.size())
    throw ShapeMismatch("energy_cost: action, previous action and torque sizes differ");
  double c = 0.0;
  for (std::size_t j = 0; j < action.size(); ++j)
    c += cfg.action_delta_coeff * (action[j] - prev_action[j]).lpNorm<1>() + cfg.torque_coeff * torques[j].lpNorm<1>();
  return c;
}

double total_reward(double r_tr, double r_st, double energy, const TrackingConfig& cfg) {
  return cfg.tracking_weight * r_tr + cfg.style_weight * r_st - energy;
}

RewardBreakdown compose(const TrackingTerms& tr, const std::array<double, 5>& style_parts, double energy,
                        const TrackingConfig& cfg) {
  RewardBreakdown b;
  b.r_h = tr.r_h;
  b.r_o = tr.r_o;
  b.r_v = tr.r_v;
  b.r_l = tr.r_l;
  b.r_tr = tr.sum();
  b.style_parts = style_parts;
  b.r_st = std::accumulate(style_parts.begin(), style_parts.end(), 0.0) / style_parts.size();
  b.energy = energy;
  b.total = total_reward(b.r_tr, b.r_st, energy, cfg);
  return b;
}

const std::vector<std::string>& breakdown_columns() {
  static const std::vector<std::string> cols{"r_h", "r_o", "r_v", "r_l", "r_tr", "style_upper_right",
                                             "style_upper_left", "style_root", "style_lower",
                                             "style_full", "r_st", "energy", "total"};
  return cols;
}

std::vector<double> breakdown_values(const RewardBreakdown& b) {
  std::vector<double> v{b.r_h, b.r_o, b.r_v, b.r_l, b.r_tr};
  v.insert(v.end(), b.style_parts.begin(), b.style_parts.end());
  v.insert(v.end(), {b.r_st, b.energy, b.total});
  return v;
}

}  // namespace mhc::reward
