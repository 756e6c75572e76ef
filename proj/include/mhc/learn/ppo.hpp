#pragma once

#include "mhc/learn/adam.hpp"
#include "mhc/learn/policy.hpp"

#include <json.hpp>

#include <random>
#include <vector>

namespace mhc::learn {

struct PpoConfig {
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double entropy_coeff = 0.0;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  double max_grad_norm = 1.0;
  int epochs = 4;
  int minibatches = 4;
  int horizon = 64;  // steps per env per iteration
  int num_envs = 8;

  /// Throws SchemaError.
  void validate() const;
};

nlohmann::json to_json(const PpoConfig& c);
PpoConfig ppo_config_from_json(const nlohmann::json& j);

struct Gae {
  VecX advantages;
  VecX returns;
};

/// One trajectory slice; `last_value` bootstraps the step after the slice.
/// A done flag at t cuts the recursion after step t.
Gae gae_advantages(const VecX& rewards, const VecX& values, const std::vector<bool>& dones, double last_value,
                   double gamma, double lambda);

/// Clipped surrogate -min(r A, clip(r) A) for one sample and its
/// derivative with respect to the new log-probability.
std::pair<double, double> clipped_surrogate(double logp_new, double logp_old, double advantage, double clip);

/// Steps of all envs; column e * horizon + t holds env e at step t.
struct RolloutBuffer {
  int num_envs = 0, horizon = 0;
  MatX obs;      // normalized observations
  MatX actions;
  VecX log_probs;
  VecX values;
  VecX rewards;
  std::vector<bool> dones;
  VecX truncation_values;  // V(s_final) at episode ends cut by the time limit, else 0
  VecX last_values;        // per env

  RolloutBuffer() = default;
  RolloutBuffer(int envs, int horizon, int obs_dim, int action_dim);
  int size() const { return num_envs * horizon; }
  int index(int env, int t) const { return env * horizon + t; }
  /// Throws ShapeMismatch.
  void validate() const;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

struct PpoOptimizers {
  Adam policy, value;
  PpoOptimizers() = default;
  PpoOptimizers(const PolicyBundle& b, const PpoConfig& cfg);
};

/// Advantages are normalized over the whole buffer. Minibatch order comes
/// from `rng`. Throws NonFiniteLoss.
PpoStats ppo_update(PolicyBundle& bundle, const RolloutBuffer& buffer, const PpoConfig& cfg, PpoOptimizers& opt,
                    std::mt19937_64& rng);

}  // namespace mhc::learn
