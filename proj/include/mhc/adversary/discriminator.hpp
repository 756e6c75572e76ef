#pragma once

#include "mhc/dataset/dataset.hpp"
#include "mhc/learn/adam.hpp"
#include "mhc/learn/mlp.hpp"
#include "mhc/motion/skeleton.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

namespace mhc::adversary {

using motion::BodyPart;
using motion::kNumBodyParts;
using motion::Pose;
using motion::SkeletonSpec;

inline constexpr int kWindowLength = 10;

/// Per-frame features, in order: root height (1), yaw-removed root 6D (6),
/// heading-frame linear and angular velocity (3 + 3), joint 6D rotations
/// (6J), root-relative joint positions (3J). A window stacks ten frames.
struct FeatureLayout {
  int joint_count = 0;
  static constexpr int kRootDim = 13;
  int frame_dim() const { return kRootDim + 9 * joint_count; }
  int window_dim() const { return kWindowLength * frame_dim(); }
};

VecX frame_features(const Pose& pose);
/// Throws ShapeMismatch unless exactly kWindowLength frames are given.
VecX window_features(const std::vector<Pose>& frames);

/// 1 for features part k may see: the root block for the root and full-body
/// parts, joint blocks for the part's channels.
VecX part_feature_mask(const SkeletonSpec& skel, BodyPart part);

struct DiscriminatorConfig {
  std::vector<int> hidden{256, 128};
  double gp_weight = 5.0;
  double clamp_eps = 0.01;
  learn::AdamConfig adam{1e-4, 0.9, 0.999, 1e-8, 1.0};
  int batch_size = 256;
  int updates_per_iteration = 4;
  int replay_capacity = 100000;
};

nlohmann::json to_json(const DiscriminatorConfig& c);
DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j);

struct DiscLossStats {
  double loss = 0.0;
  double bce = 0.0;
  double penalty = 0.0;
  double mean_real = 0.0;  // mean D on real windows
  double mean_fake = 0.0;
};

/// One SiLU trunk shared by five part wrappers. A wrapper zeroes the
/// features outside its part and appends a one-hot part code.
class DiscriminatorEnsemble {
 public:
  DiscriminatorEnsemble() = default;
  DiscriminatorEnsemble(const SkeletonSpec& skel, const DiscriminatorConfig& cfg, std::uint64_t seed);

  const DiscriminatorConfig& config() const { return cfg_; }
  int window_dim() const { return window_dim_; }
  learn::Mlp& trunk() { return trunk_; }
  const learn::Mlp& trunk() const { return trunk_; }
  const VecX& part_mask(int k) const { return masks_[k]; }

  /// Wrapped trunk input for part k (window_dim + 5 rows).
  MatX wrap(const MatX& windows, int part) const;
  /// Raw logits, 1 x N.
  MatX logits(const MatX& windows, int part) const;
  /// Clamped probabilities, 1 x N.
  MatX probabilities(const MatX& windows, int part) const;

  /// Per-part style values -ln(1 - clamp(D)) (5 x N).
  MatX style_parts(const MatX& windows) const;

  /// Mean over parts of 0.5 * (BCE_real + BCE_fake) + gp * E_real |grad_x logit|^2.
  /// Adds parameter gradients to `grad` when given.
  DiscLossStats loss(const MatX& real, const MatX& fake, VecX* grad = nullptr) const;

 private:
  DiscriminatorConfig cfg_;
  int window_dim_ = 0;
  learn::Mlp trunk_;
  std::array<VecX, kNumBodyParts> masks_;
};

/// Style reward r_st and its five parts for one window.
std::pair<std::array<double, 5>, double> style_reward(const DiscriminatorEnsemble& d, const VecX& window);

/// One Adam step on the discriminator loss.
DiscLossStats update_discriminators(DiscriminatorEnsemble& d, const MatX& real, const MatX& fake, learn::Adam& opt);

/// Uniform random 10-frame windows from the clips of `ds` (columns).
MatX sample_real_windows(const dataset::MotionDataset& ds, int count, std::mt19937_64& rng);

/// FIFO of policy windows, stored in single precision.
class WindowReplay {
 public:
  WindowReplay(int window_dim, int capacity);
  void push(const VecX& window);
  int size() const { return static_cast<int>(data_.size()); }
  int capacity() const { return capacity_; }
  MatX sample(int count, std::mt19937_64& rng) const;

 private:
  int dim_;
  int capacity_;
  std::deque<Eigen::VectorXf> data_;
};

}  // namespace mhc::adversary
