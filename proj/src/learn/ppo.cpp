#include "mhc/learn/ppo.hpp"

#include "mhc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mhc::learn {

void PpoConfig::validate() const {
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) throw SchemaError("clip_ratio must be in (0,1)");
  if (!(gamma > 0.0 && gamma <= 1.0) || !(lambda > 0.0 && lambda <= 1.0))
    throw SchemaError("gamma and lambda must be in (0,1]");
  if (epochs < 1 || minibatches < 1 || horizon < 1 || num_envs < 1) throw SchemaError("ppo counts must be positive");
  if (!(policy_lr >= 0.0 && value_lr >= 0.0 && entropy_coeff >= 0.0)) throw SchemaError("ppo rates must be >= 0");
}

nlohmann::json to_json(const PpoConfig& c) {
  return {{"clip_ratio", c.clip_ratio}, {"gamma", c.gamma},       {"lambda", c.lambda},
          {"entropy_coeff", c.entropy_coeff}, {"policy_lr", c.policy_lr}, {"value_lr", c.value_lr},
          {"max_grad_norm", c.max_grad_norm}, {"epochs", c.epochs},   {"minibatches", c.minibatches},
          {"horizon", c.horizon},       {"num_envs", c.num_envs}};
}

PpoConfig ppo_config_from_json(const nlohmann::json& j) {
  PpoConfig c;
  c.clip_ratio = j.value("clip_ratio", c.clip_ratio);
  c.gamma = j.value("gamma", c.gamma);
  c.lambda = j.value("lambda", c.lambda);
  c.entropy_coeff = j.value("entropy_coeff", c.entropy_coeff);
  c.policy_lr = j.value("policy_lr", c.policy_lr);
  c.value_lr = j.value("value_lr", c.value_lr);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatches = j.value("minibatches", c.minibatches);
  c.horizon = j.value("horizon", c.horizon);
  c.num_envs = j.value("num_envs", c.num_envs);
  c.validate();
  return c;
}

Gae gae_advantages(const VecX& rewards, const VecX& values, const std::vector<bool>& dones, double last_value,
                   double gamma, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || static_cast<Eigen::Index>(dones.size()) != n) throw ShapeMismatch("gae: length mismatch");
  Gae g{VecX::Zero(n), VecX::Zero(n)};
  double next_adv = 0.0, next_value = last_value;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    g.advantages[t] = next_adv;
    next_value = values[t];
  }
  g.returns = g.advantages + values;
  return g;
}

std::pair<double, double> clipped_surrogate(double logp_new, double logp_old, double advantage, double clip) {
  const double ratio = std::exp(logp_new - logp_old);
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  const double unclipped_obj = ratio * advantage, clipped_obj = clipped * advantage;
  if (unclipped_obj <= clipped_obj) return {-unclipped_obj, -advantage * ratio};
  return {-clipped_obj, 0.0};
}

RolloutBuffer::RolloutBuffer(int envs, int h, int obs_dim, int action_dim)
    : num_envs(envs),
      horizon(h),
      obs(MatX::Zero(obs_dim, envs * h)),
      actions(MatX::Zero(action_dim, envs * h)),
      log_probs(VecX::Zero(envs * h)),
      values(VecX::Zero(envs * h)),
      rewards(VecX::Zero(envs * h)),
      dones(envs * h, false),
      truncation_values(VecX::Zero(envs * h)),
      last_values(VecX::Zero(envs)) {}

void RolloutBuffer::validate() const {
  const int n = size();
  if (n <= 0) throw ShapeMismatch("rollout buffer is empty");
  if (obs.cols() != n || actions.cols() != n || log_probs.size() != n || values.size() != n || rewards.size() != n ||
      static_cast<int>(dones.size()) != n || truncation_values.size() != n || last_values.size() != num_envs)
    throw ShapeMismatch("rollout buffer fields disagree in length");
}

PpoOptimizers::PpoOptimizers(const PolicyBundle& b, const PpoConfig& cfg)
    : policy(b.policy.param_count(), {cfg.policy_lr, 0.9, 0.999, 1e-8, cfg.max_grad_norm}),
      value(b.value.param_count(), {cfg.value_lr, 0.9, 0.999, 1e-8, cfg.max_grad_norm}) {}

PpoStats ppo_update(PolicyBundle& bundle, const RolloutBuffer& buf, const PpoConfig& cfg, PpoOptimizers& opt,
                    std::mt19937_64& rng) {
  buf.validate();
  const int n = buf.size();
  VecX adv(n), ret(n);
  for (int e = 0; e < buf.num_envs; ++e) {
    const int s = buf.index(e, 0), h = buf.horizon;
    std::vector<bool> d(buf.dones.begin() + s, buf.dones.begin() + s + h);
    const VecX r = buf.rewards.segment(s, h) + cfg.gamma * buf.truncation_values.segment(s, h);
    const Gae g = gae_advantages(r, buf.values.segment(s, h), d, buf.last_values[e],
                                 cfg.gamma, cfg.lambda);
    adv.segment(s, h) = g.advantages;
    ret.segment(s, h) = g.returns;
  }
  const double mean = adv.mean();
  const double sd = std::sqrt((adv.array() - mean).square().mean());
  adv = ((adv.array() - mean) / (sd + 1e-8)).matrix();

  auto& pol = bundle.policy;
  const int A = pol.action_dim();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const int mb = std::max(1, n / cfg.minibatches);
  PpoStats stats;
  int batches = 0;
  double clipped = 0.0, samples = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start + mb <= n; start += mb) {
      MatX obs(buf.obs.rows(), mb), act(A, mb);
      VecX old_lp(mb), a(mb), r(mb);
      for (int i = 0; i < mb; ++i) {
        const int k = order[start + i];
        obs.col(i) = buf.obs.col(k);
        act.col(i) = buf.actions.col(k);
        old_lp[i] = buf.log_probs[k];
        a[i] = adv[k];
        r[i] = ret[k];
      }
      GaussianPolicy::Cache cache;
      const MatX mu = pol.mean(obs, &cache);
      const VecX lp = gaussian_log_prob(mu, pol.log_std(), act);
      const VecX inv_var = (-2.0 * pol.log_std().array()).exp().matrix();
      MatX d_mean(A, mb);
      VecX d_log_std = VecX::Zero(A);
      double ploss = 0.0, kl = 0.0;
      for (int i = 0; i < mb; ++i) {
        const auto [l, dl] = clipped_surrogate(lp[i], old_lp[i], a[i], cfg.clip_ratio);
        ploss += l / mb;
        const double ratio = std::exp(lp[i] - old_lp[i]);
        kl += ((ratio - 1.0) - (lp[i] - old_lp[i])) / mb;
        clipped += std::abs(ratio - 1.0) > cfg.clip_ratio ? 1.0 : 0.0;
        const VecX diff = act.col(i) - mu.col(i);
        d_mean.col(i) = (dl / mb) * diff.cwiseProduct(inv_var);
        d_log_std += (dl / mb) * (diff.cwiseAbs2().cwiseProduct(inv_var).array() - 1.0).matrix();
      }
      samples += mb;
      const double ent = gaussian_entropy(pol.log_std());
      ploss -= cfg.entropy_coeff * ent;
      d_log_std.array() -= cfg.entropy_coeff;

      Mlp::Cache vcache;
      const MatX v = bundle.value.forward(obs, &vcache);
      const MatX verr = v - r.transpose();
      const double vloss = 0.5 * verr.squaredNorm() / mb;
      if (!std::isfinite(ploss) || !std::isfinite(vloss)) throw NonFiniteLoss("ppo loss is not finite");

      VecX g = VecX::Zero(pol.param_count());
      pol.backward(cache, d_mean, g);
      if (pol.learn_log_std()) g.tail(A) += d_log_std;
      VecX p = pol.flat_params();
      opt.policy.step(p, g);
      pol.set_flat_params(p);

      VecX gv = VecX::Zero(bundle.value.param_count());
      bundle.value.backward(vcache, verr / mb, gv);
      opt.value.step(bundle.value.params(), gv);

      stats.policy_loss += ploss;
      stats.value_loss += vloss;
      stats.entropy += ent;
      stats.approx_kl += kl;
      ++batches;
    }
  }
  if (batches > 0) {
    stats.policy_loss /= batches;
    stats.value_loss /= batches;
    stats.entropy /= batches;
    stats.approx_kl /= batches;
  }
  stats.clip_fraction = samples > 0 ? clipped / samples : 0.0;
  return stats;
}

}  // namespace mhc::learn
