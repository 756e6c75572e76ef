#pragma once

#include "mhc/directive/observation.hpp"
#include "mhc/learn/checkpoint.hpp"
#include "mhc/learn/mlp.hpp"
#include "mhc/learn/normalizer.hpp"
#include "mhc/sim/sim.hpp"

#include <filesystem>
#include <random>

namespace mhc::learn {

using motion::Pose;

struct PolicyConfig {
  std::vector<int> encoder{256, 128};  // last entry is the encoding width
  std::vector<int> head{256, 256};
  std::vector<int> value{256, 256};
  double init_log_std = -1.0;
  bool learn_log_std = true;

  void validate() const;
};

nlohmann::json to_json(const PolicyConfig& c);
PolicyConfig policy_config_from_json(const nlohmann::json& j);

/// Directive encoder over the target block, concatenated with the pose block
/// and fed to the action head. Gaussian with state-independent log-std.
class GaussianPolicy {
 public:
  struct Cache {
    Mlp::Cache encoder, head;
  };

  GaussianPolicy() = default;
  GaussianPolicy(int joint_count, const PolicyConfig& cfg);

  void init(std::mt19937_64& rng);

  const directive::ObservationLayout& layout() const { return layout_; }
  int obs_dim() const { return layout_.total(); }
  int action_dim() const { return 3 * layout_.joint_count; }
  bool learn_log_std() const { return learn_log_std_; }

  Mlp& encoder() { return encoder_; }
  Mlp& head() { return head_; }
  const Mlp& encoder() const { return encoder_; }
  const Mlp& head() const { return head_; }
  VecX& log_std() { return log_std_; }
  const VecX& log_std() const { return log_std_; }

  /// Action means for a batch of (normalized) observations.
  MatX mean(const MatX& obs, Cache* cache = nullptr) const;
  /// Accumulates into the flat gradient [encoder | head | log_std]; the
  /// log-std part is left untouched here.
  void backward(const Cache& cache, const MatX& d_mean, VecX& grad) const;

  int param_count() const;
  VecX flat_params() const;
  void set_flat_params(const VecX& p);

 private:
  directive::ObservationLayout layout_;
  Mlp encoder_, head_;
  VecX log_std_;
  bool learn_log_std_ = true;
};

/// Sum over dimensions of the diagonal Gaussian log-density, per column.
VecX gaussian_log_prob(const MatX& mean, const VecX& log_std, const MatX& actions);
double gaussian_entropy(const VecX& log_std);

/// Policy, value network and observation statistics as used at run time.
struct PolicyBundle {
  PolicyConfig config;
  GaussianPolicy policy;
  Mlp value;
  RunningNormalizer normalizer;
  int iteration = 0;

  PolicyBundle() = default;
  PolicyBundle(int joint_count, const PolicyConfig& cfg, std::uint64_t seed);

  int joint_count() const { return policy.layout().joint_count; }

  /// Set points for the current pose; stochastic when `rng` is given.
  sim::Action act(const Pose& pose, const directive::Directive& d, int t, std::mt19937_64* rng = nullptr) const;
};

sim::Action action_from_vector(const VecX& a);

TensorFile to_tensor_file(const PolicyBundle& b);
PolicyBundle policy_from_tensor_file(const TensorFile& f);
void save_policy(const PolicyBundle& b, const std::filesystem::path& path);
/// Throws SchemaError.
PolicyBundle load_policy(const std::filesystem::path& path);

}  // namespace mhc::learn
