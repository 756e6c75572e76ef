#pragma once

#include "mhc/dataset/dataset.hpp"
#include "mhc/eval/metrics.hpp"
#include "mhc/learn/policy.hpp"
#include "mhc/sim/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace mhc::eval {

/// Produces one frame per directive frame, frame 0 being the initial pose.
class MotionGenerator {
 public:
  virtual ~MotionGenerator() = default;
  /// Must be safe to call concurrently.
  virtual std::vector<Pose> generate(const Pose& initial, const Directive& d) const = 0;
};

/// Runs the policy's mean action in the simulator, one directive frame per
/// control step (sliding window, no re-synchronisation).
class PolicyGenerator : public MotionGenerator {
 public:
  PolicyGenerator(const learn::PolicyBundle& bundle, const sim::Simulator& sim) : bundle_(bundle), sim_(sim) {}
  std::vector<Pose> generate(const Pose& initial, const Directive& d) const override;

 private:
  const learn::PolicyBundle& bundle_;
  const sim::Simulator& sim_;
};

/// Holds the initial joint angles.
class HoldGenerator : public MotionGenerator {
 public:
  explicit HoldGenerator(const sim::Simulator& sim) : sim_(sim) {}
  std::vector<Pose> generate(const Pose& initial, const Directive& d) const override;

 private:
  const sim::Simulator& sim_;
};

/// Sets the character to the directive frame every step.
class TeleportGenerator : public MotionGenerator {
 public:
  std::vector<Pose> generate(const Pose& initial, const Directive& d) const override;
};

enum class Protocol { kImitate, kCatchup, kCombine, kComplete };

std::string to_string(Protocol p);
/// Throws std::invalid_argument.
Protocol protocol_from_string(const std::string& s);
double protocol_budget(Protocol p);

struct EvalConfig {
  std::uint64_t seed = 1;
  int episodes_per_cell = 20;
  int episode_length = 150;
  int combinations = 4;  // M+ combinations for catchup initial poses
  double p_fall = 0.1;
  int fall_bank_size = 16;
  std::vector<int> menu{0, 1, 2, 3, 4};
  std::vector<double> joint_mask_percentages{0, 25, 50, 75};
  int threads = 1;
  int horizon = 10;

  /// Throws std::invalid_argument.
  void validate() const;
};

nlohmann::json to_json(const EvalConfig& c);
EvalConfig eval_config_from_json(const nlohmann::json& j);

/// One scored episode. `driving` is what the controller sees, `scoring`
/// the reference frames restricted to the scored joints.
struct EvalEpisode {
  std::string clip;
  Pose initial;
  Directive driving;
  Directive scoring;
};

struct EvalRow {
  std::string protocol;
  int episode = 0;
  std::string clip;
  std::string mask;
  double mpjpe_mm = 0.0;
  double failed_frame_fraction = 0.0;
  bool success = false;
  std::string error;  // empty unless the rollout threw
};

struct EvalReport {
  std::string protocol;
  double budget = kDefaultBudget;
  std::vector<EvalRow> rows;
  double mean_mpjpe_mm = 0.0;  // over rows without error
  double success_rate = 0.0;   // over all rows; errored rows count as failures
};

/// Episodes for a protocol, deterministic in cfg.seed. `data` is the raw
/// dataset M; catchup draws initial poses from M+ and a generated fall bank.
std::vector<EvalEpisode> protocol_episodes(Protocol p, const dataset::MotionDataset& data, const sim::Simulator& sim,
                                           const EvalConfig& cfg);

/// Scores the generator on the episodes. Rollout exceptions are recorded
/// per row, not rethrown.
EvalReport run_episodes(Protocol p, const std::vector<EvalEpisode>& episodes, const MotionGenerator& gen,
                        int threads = 1);

EvalReport run_protocol(Protocol p, const MotionGenerator& gen, const dataset::MotionDataset& data,
                        const sim::Simulator& sim, const EvalConfig& cfg);

/// Mean and success rate recomputed from the rows.
void aggregate(EvalReport& r);

const std::vector<std::string>& eval_columns();
std::string eval_csv(const EvalReport& r);
void write_eval_csv(const EvalReport& r, const std::filesystem::path& path);

}  // namespace mhc::eval
