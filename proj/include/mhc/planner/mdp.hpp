#pragma once

#include <utility>
#include <vector>

namespace mhc::planner {

/// Tabular MDP. Entry (s, a) lives at s * num_actions + a. Terminal states
/// have value 0 and no outgoing transitions.
struct FiniteMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> reward;
  std::vector<std::vector<std::pair<int, double>>> next;  // (state, probability)
  std::vector<bool> terminal;

  FiniteMdp() = default;
  FiniteMdp(int states, int actions);
  int at(int s, int a) const { return s * num_actions + a; }
  /// Throws std::invalid_argument on bad indices or probabilities that do
  /// not sum to 1.
  void validate() const;
};

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<double> residuals;  // sup-norm change per sweep
  int iterations = 0;
};

/// Jacobi sweeps V <- max_a R + gamma P V until the sup-norm change drops
/// below `tol`. Throws NoConvergence after `max_iters` sweeps.
ValueIterationResult value_iteration(const FiniteMdp& mdp, double gamma, double tol = 1e-8,
                                     int max_iters = 100000);

/// argmax_a of R(s,a) + gamma sum P V, ties to the lowest action.
int greedy_action(const FiniteMdp& mdp, const std::vector<double>& values, double gamma, int s);

}  // namespace mhc::planner
