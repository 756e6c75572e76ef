#pragma once

#include "mhc/planner/mdp.hpp"
#include "mhc/planner/task.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <vector>

namespace mhc::planner {

struct DacConfig {
  int k = 5;
  double cost = 1.0;  // C, penalty per unit distance to the data
  double gamma = 0.99;
  double tol = 1e-8;
  int max_iters = 100000;

  /// Throws std::invalid_argument.
  void validate() const;
};

nlohmann::json to_json(const DacConfig& c);
DacConfig dac_config_from_json(const nlohmann::json& j);

struct Neighborhood {
  std::vector<int> index;  // into the transition list, nearest first
  std::vector<double> distance;
  std::vector<double> weight;  // proportional to 1/(d + 1e-6), summing to 1
};

/// Relabels a logged transition, e.g. with a different task reward.
using RewardFn = std::function<double(const Transition&)>;

class DacMdp;
DacMdp load_dac_mdp(const std::filesystem::path& path);

/// MDP compiled from logged transitions by per-action k-nearest-neighbour
/// averaging. Value states are the logged next-states; a terminal
/// next-state has value 0.
class DacMdp {
 public:
  /// Throws InsufficientData when an action in [0, num_actions) has fewer
  /// than k transitions.
  DacMdp(std::vector<Transition> transitions, int num_actions, DacConfig cfg, const RewardFn& relabel = {});

  const DacConfig& config() const { return cfg_; }
  int num_actions() const { return num_actions_; }
  const std::vector<Transition>& transitions() const { return data_; }
  /// Reward r* of transition i after relabelling.
  double reward_of(int i) const { return reward_[i]; }

  Neighborhood neighbors(const VecX& s, int a) const;
  /// R(s,a) = sum_j w_j (r*_j - C d_j).
  double reward(const VecX& s, int a) const;

  FiniteMdp compile() const;
  /// Runs value iteration on the compiled MDP. Throws NoConvergence.
  const ValueIterationResult& solve();
  bool solved() const { return solved_; }
  const std::vector<double>& values() const { return solution_.values; }

  double q_value(const VecX& s, int a) const;
  /// argmax_a q_value, ties to the lowest id. Throws std::logic_error before
  /// solve().
  int greedy_action(const VecX& s) const;

 private:
  friend DacMdp load_dac_mdp(const std::filesystem::path& path);

  std::vector<Transition> data_;
  std::vector<double> reward_;
  std::vector<std::vector<int>> by_action_;
  int num_actions_;
  DacConfig cfg_;
  ValueIterationResult solution_;
  bool solved_ = false;
};

/// Versioned binary ("MHC-CKPT/1" tensor file) holding config, transitions,
/// relabelled rewards and, if solved, the values.
void save_dac_mdp(const DacMdp& m, const std::filesystem::path& path);
/// Throws SchemaError.
DacMdp load_dac_mdp(const std::filesystem::path& path);

}  // namespace mhc::planner
