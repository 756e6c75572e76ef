#include "mhc/learn/policy.hpp"

#include "mhc/errors.hpp"

#include <cmath>
#include <numbers>

namespace mhc::learn {

using directive::ObservationLayout;

void PolicyConfig::validate() const {
  if (encoder.size() < 2) throw SchemaError("policy encoder needs a hidden width and an encoding width");
  if (head.empty() || value.empty()) throw SchemaError("policy head and value net need hidden layers");
  for (const auto* v : {&encoder, &head, &value})
    for (int w : *v)
      if (w <= 0) throw SchemaError("network widths must be positive");
  if (!std::isfinite(init_log_std)) throw SchemaError("init_log_std must be finite");
}

nlohmann::json to_json(const PolicyConfig& c) {
  return {{"encoder", c.encoder}, {"head", c.head}, {"value", c.value},
          {"init_log_std", c.init_log_std}, {"learn_log_std", c.learn_log_std}};
}

PolicyConfig policy_config_from_json(const nlohmann::json& j) {
  PolicyConfig c;
  c.encoder = j.value("encoder", c.encoder);
  c.head = j.value("head", c.head);
  c.value = j.value("value", c.value);
  c.init_log_std = j.value("init_log_std", c.init_log_std);
  c.learn_log_std = j.value("learn_log_std", c.learn_log_std);
  c.validate();
  return c;
}

GaussianPolicy::GaussianPolicy(int joint_count, const PolicyConfig& cfg)
    : layout_{joint_count}, learn_log_std_(cfg.learn_log_std) {
  cfg.validate();
  const std::vector<int> enc_hidden(cfg.encoder.begin(), cfg.encoder.end() - 1);
  encoder_ = Mlp({layout_.target_dim(), enc_hidden, cfg.encoder.back(), true});
  head_ = Mlp({layout_.pose_dim() + cfg.encoder.back(), cfg.head, action_dim(), false});
  log_std_ = VecX::Constant(action_dim(), cfg.init_log_std);
}

void GaussianPolicy::init(std::mt19937_64& rng) {
  encoder_.init(rng);
  head_.init(rng, 0.01);
}

MatX GaussianPolicy::mean(const MatX& obs, Cache* cache) const {
  if (obs.rows() != obs_dim()) throw ShapeMismatch("policy: wrong observation width");
  const int pd = layout_.pose_dim();
  const MatX enc = encoder_.forward(obs.bottomRows(layout_.target_dim()), cache ? &cache->encoder : nullptr);
  MatX head_in(pd + enc.rows(), obs.cols());
  head_in.topRows(pd) = obs.topRows(pd);
  head_in.bottomRows(enc.rows()) = enc;
  return head_.forward(head_in, cache ? &cache->head : nullptr);
}

void GaussianPolicy::backward(const Cache& cache, const MatX& d_mean, VecX& grad) const {
  if (grad.size() != param_count()) throw ShapeMismatch("policy: wrong gradient size");
  const int ne = encoder_.param_count(), nh = head_.param_count();
  VecX gh = VecX::Zero(nh);
  const MatX d_in = head_.backward(cache.head, d_mean, gh);
  grad.segment(ne, nh) += gh;
  VecX ge = VecX::Zero(ne);
  encoder_.backward(cache.encoder, d_in.bottomRows(encoder_.shape().output), ge);
  grad.head(ne) += ge;
}

int GaussianPolicy::param_count() const {
  return encoder_.param_count() + head_.param_count() + static_cast<int>(log_std_.size());
}

VecX GaussianPolicy::flat_params() const {
  VecX p(param_count());
  p << encoder_.params(), head_.params(), log_std_;
  return p;
}

void GaussianPolicy::set_flat_params(const VecX& p) {
  if (p.size() != param_count()) throw ShapeMismatch("policy: wrong parameter count");
  const int ne = encoder_.param_count(), nh = head_.param_count();
  encoder_.params() = p.head(ne);
  head_.params() = p.segment(ne, nh);
  log_std_ = p.tail(log_std_.size());
}

VecX gaussian_log_prob(const MatX& mean, const VecX& log_std, const MatX& actions) {
  const VecX inv_std = (-log_std.array()).exp().matrix();
  const MatX z = (actions - mean).array().colwise() * inv_std.array();
  const double c = log_std.sum() + 0.5 * std::log(2.0 * std::numbers::pi) * log_std.size();
  return (-0.5 * z.cwiseAbs2().colwise().sum().array() - c).matrix().transpose();
}

double gaussian_entropy(const VecX& log_std) {
  return log_std.sum() + 0.5 * (1.0 + std::log(2.0 * std::numbers::pi)) * log_std.size();
}

PolicyBundle::PolicyBundle(int joint_count, const PolicyConfig& cfg, std::uint64_t seed)
    : config(cfg), policy(joint_count, cfg) {
  std::mt19937_64 rng(seed);
  policy.init(rng);
  value = Mlp({policy.obs_dim(), cfg.value, 1, false});
  value.init(rng);
  normalizer = RunningNormalizer(policy.obs_dim());
}

sim::Action action_from_vector(const VecX& a) {
  sim::Action act;
  for (Eigen::Index c = 0; c + 2 < a.size(); c += 3) act.setpoints.push_back(a.segment<3>(c));
  return act;
}

sim::Action PolicyBundle::act(const Pose& pose, const directive::Directive& d, int t, std::mt19937_64* rng) const {
  const MatX obs = normalizer.normalize(directive::encode_observation(pose, d, t));
  VecX a = policy.mean(obs).col(0);
  if (rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += std::exp(policy.log_std()[i]) * n(*rng);
  }
  return action_from_vector(a);
}

TensorFile to_tensor_file(const PolicyBundle& b) {
  TensorFile f;
  f.meta = {{"kind", "mhc-policy"},
            {"version", 1},
            {"joint_count", b.joint_count()},
            {"iteration", b.iteration},
            {"config", to_json(b.config)},
            {"normalizer_count", b.normalizer.count()},
            {"normalizer_clip", b.normalizer.clip()}};
  f.tensors["policy.encoder"] = b.policy.encoder().params();
  f.tensors["policy.head"] = b.policy.head().params();
  f.tensors["policy.log_std"] = b.policy.log_std();
  f.tensors["value"] = b.value.params();
  f.tensors["normalizer.mean"] = b.normalizer.mean();
  f.tensors["normalizer.var"] = b.normalizer.var();
  return f;
}

PolicyBundle policy_from_tensor_file(const TensorFile& f) {
  try {
    if (f.meta.at("kind") != "mhc-policy") throw SchemaError("not a policy checkpoint");
    if (f.meta.at("version").get<int>() != 1) throw SchemaError("unsupported policy checkpoint version");
    const int J = f.meta.at("joint_count").get<int>();
    PolicyBundle b(J, policy_config_from_json(f.meta.at("config")), 0);
    b.iteration = f.meta.at("iteration").get<int>();
    auto load = [&](const char* name, VecX& dst) {
      const VecX& src = f.at(name);
      if (src.size() != dst.size()) throw SchemaError(std::string("checkpoint tensor '") + name + "' has the wrong size");
      dst = src;
    };
    load("policy.encoder", b.policy.encoder().params());
    load("policy.head", b.policy.head().params());
    load("policy.log_std", b.policy.log_std());
    load("value", b.value.params());
    VecX mean = VecX::Zero(b.policy.obs_dim()), var = mean;
    load("normalizer.mean", mean);
    load("normalizer.var", var);
    b.normalizer = RunningNormalizer(b.policy.obs_dim(), f.meta.at("normalizer_clip").get<double>());
    b.normalizer.set_state(mean, var, f.meta.at("normalizer_count").get<double>());
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("policy checkpoint: ") + e.what());
  }
}

void save_policy(const PolicyBundle& b, const std::filesystem::path& path) { write_tensor_file(to_tensor_file(b), path); }

PolicyBundle load_policy(const std::filesystem::path& path) { return policy_from_tensor_file(read_tensor_file(path)); }

}  // namespace mhc::learn
