#pragma once

#include "mhc/adversary/discriminator.hpp"
#include "mhc/dataset/augment.hpp"
#include "mhc/directive/episode.hpp"
#include "mhc/learn/policy.hpp"
#include "mhc/learn/ppo.hpp"
#include "mhc/reward/reward.hpp"
#include "mhc/sim/sim.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mhc::learn {

struct TrainConfig {
  std::uint64_t seed = 1;
  int iterations = 200;
  int threads = 1;
  int checkpoint_every = 50;  // 0 disables periodic checkpoints

  // Dataset: a directory, or synthetic clips when empty.
  std::string dataset_dir;
  int synthetic_clips = 4;
  int synthetic_frames = 300;

  int combinations = 8;
  double p_fall = 0.1;
  int fall_bank_size = 32;

  directive::EpisodeSpec episode;
  sim::SimConfig sim;
  reward::TrackingConfig reward;
  PolicyConfig policy;
  PpoConfig ppo;
  adversary::DiscriminatorConfig discriminator;

  /// Throws SchemaError.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);
/// Small widths and short rollouts for single-machine smoke runs.
TrainConfig smoke_config();

struct IterationMetrics {
  int iteration = 0;
  long steps = 0;
  double r_h = 0, r_o = 0, r_v = 0, r_l = 0;
  double r_tr = 0, r_st = 0, energy = 0, total = 0;
  double fallen_fraction = 0;
  int episodes_finished = 0;
  PpoStats ppo;
  adversary::DiscLossStats disc;
};

const std::vector<std::string>& metrics_columns();
std::string metrics_row(const IterationMetrics& m);

/// Everything needed to recompute the reward of one logged step.
struct StepLog {
  Pose pose;
  Pose target;
  directive::DirectiveMask mask;
  std::vector<Vec3> action, prev_action, torque;
  std::array<double, 5> style{};
  double reward = 0.0;
};

class Trainer {
 public:
  Trainer(TrainConfig cfg, dataset::MotionDataset data);

  const TrainConfig& config() const { return cfg_; }
  int iteration() const { return iteration_; }
  const PolicyBundle& bundle() const { return bundle_; }
  const adversary::DiscriminatorEnsemble& discriminator() const { return disc_; }
  const dataset::MotionDataset& mplus() const { return mplus_; }

  /// Collect rollouts, update the discriminators, then PPO.
  IterationMetrics iterate();

  void enable_step_log(bool on) { log_steps_ = on; }
  const std::vector<StepLog>& step_log() const { return step_log_; }

 private:
  struct Env {
    std::mt19937_64 rng;
    sim::SimState state;
    directive::EpisodeDirective episode;
    int t = 0;
    std::deque<Pose> history;
  };

  void reset_env(Env& env);
  VecX window_of(const Env& env) const;

  TrainConfig cfg_;
  dataset::MotionDataset data_;
  dataset::MotionDataset mplus_;
  sim::Simulator sim_;
  std::vector<Pose> fall_bank_;
  PolicyBundle bundle_;
  PpoOptimizers opt_;
  adversary::DiscriminatorEnsemble disc_;
  Adam disc_opt_;
  adversary::WindowReplay replay_;
  std::vector<Env> envs_;
  std::mt19937_64 rng_;
  int iteration_ = 0;
  bool log_steps_ = false;
  std::vector<StepLog> step_log_;
};

void save_discriminator(const adversary::DiscriminatorEnsemble& d, int joint_count,
                        const std::filesystem::path& path);
adversary::DiscriminatorEnsemble load_discriminator(const std::filesystem::path& path,
                                                    const motion::SkeletonSpec& skel);

/// Dataset named by the config (directory or synthetic clips).
dataset::MotionDataset load_training_data(const TrainConfig& cfg);

/// Runs all iterations, writing metrics.csv, resolved-config.json,
/// policy.ckpt, discriminator.ckpt and periodic checkpoints under `out`.
std::vector<IterationMetrics> train(const TrainConfig& cfg, const std::filesystem::path& out,
                                    const std::function<void(const IterationMetrics&)>& progress = {});

}  // namespace mhc::learn
