#include "mhc/planner/mdp.hpp"

#include "mhc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mhc::planner {

FiniteMdp::FiniteMdp(int states, int actions)
    : num_states(states),
      num_actions(actions),
      reward(static_cast<std::size_t>(states) * actions, 0.0),
      next(static_cast<std::size_t>(states) * actions),
      terminal(states, false) {}

void FiniteMdp::validate() const {
  if (num_states < 1 || num_actions < 1) throw std::invalid_argument("mdp needs states and actions");
  const std::size_t n = static_cast<std::size_t>(num_states) * num_actions;
  if (reward.size() != n || next.size() != n || terminal.size() != static_cast<std::size_t>(num_states))
    throw std::invalid_argument("mdp tables have the wrong size");
  for (int s = 0; s < num_states; ++s) {
    if (terminal[s]) continue;
    for (int a = 0; a < num_actions; ++a) {
      double total = 0.0;
      for (const auto& [t, p] : next[at(s, a)]) {
        if (t < 0 || t >= num_states) throw std::invalid_argument("mdp successor out of range");
        if (!(p >= 0.0)) throw std::invalid_argument("negative transition probability");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("transition probabilities of (" + std::to_string(s) + "," + std::to_string(a) +
                                    ") sum to " + std::to_string(total));
    }
  }
}

namespace {

double backup(const FiniteMdp& mdp, const std::vector<double>& v, double gamma, int s, int a) {
  double q = mdp.reward[mdp.at(s, a)];
  for (const auto& [t, p] : mdp.next[mdp.at(s, a)]) q += gamma * p * v[t];
  return q;
}

}  // namespace

ValueIterationResult value_iteration(const FiniteMdp& mdp, double gamma, double tol, int max_iters) {
  mdp.validate();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  ValueIterationResult r;
  r.values.assign(mdp.num_states, 0.0);
  std::vector<double> next(mdp.num_states, 0.0);
  for (int it = 1; it <= max_iters; ++it) {
    double change = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
      if (mdp.terminal[s]) {
        next[s] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.num_actions; ++a) best = std::max(best, backup(mdp, r.values, gamma, s, a));
      next[s] = best;
      change = std::max(change, std::abs(best - r.values[s]));
    }
    r.values.swap(next);
    r.residuals.push_back(change);
    r.iterations = it;
    if (change < tol) return r;
  }
  throw NoConvergence("value iteration did not reach tolerance " + std::to_string(tol) + " in " +
                      std::to_string(max_iters) + " sweeps");
}

int greedy_action(const FiniteMdp& mdp, const std::vector<double>& values, double gamma, int s) {
  int best_a = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < mdp.num_actions; ++a) {
    const double q = backup(mdp, values, gamma, s, a);
    if (q > best) {
      best = q;
      best_a = a;
    }
  }
  return best_a;
}

}  // namespace mhc::planner
