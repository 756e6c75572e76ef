#include "harness.hpp"
#include "mhc/planner/dac_mdp.hpp"
#include "mhc/planner/mdp.hpp"
#include "mhc/planner/task.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace mhc::acceptance {
namespace {

using namespace mhc::planner;

FiniteMdp random_mdp(std::mt19937_64& rng, int states, int actions) {
  FiniteMdp m(states, actions);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, states - 1);
  for (int s = 0; s < states; ++s) {
    m.terminal[s] = u(rng) < 0.1;
    if (m.terminal[s]) continue;
    for (int a = 0; a < actions; ++a) {
      m.reward[m.at(s, a)] = 2.0 * u(rng) - 1.0;
      const int fan = 1 + static_cast<int>(u(rng) * 3);
      double total = 0.0;
      std::vector<std::pair<int, double>> next;
      for (int i = 0; i < fan; ++i) {
        next.emplace_back(pick(rng), u(rng) + 0.1);
        total += next.back().second;
      }
      for (auto& [_, p] : next) p /= total;
      m.next[m.at(s, a)] = next;
    }
  }
  return m;
}

// Policy iteration with a dense linear solve per evaluation, run until the
// policy stops changing.
std::vector<double> dense_fixed_point(const FiniteMdp& m, double gamma) {
  const int n = m.num_states;
  std::vector<int> pi(n, 0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  auto q = [&](int s, int a) {
    double r = m.reward[m.at(s, a)];
    for (const auto& [s2, p] : m.next[m.at(s, a)]) r += gamma * p * v[s2];
    return r;
  };
  for (int round = 0; round < 1000; ++round) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
      if (m.terminal[s]) continue;
      b[s] = m.reward[m.at(s, pi[s])];
      for (const auto& [s2, p] : m.next[m.at(s, pi[s])]) A(s, s2) -= gamma * p;
    }
    v = A.fullPivLu().solve(b);
    bool stable = true;
    for (int s = 0; s < n; ++s) {
      if (m.terminal[s]) continue;
      for (int a = 0; a < m.num_actions; ++a)
        if (q(s, a) > q(s, pi[s]) + 1e-12) {
          pi[s] = a;
          stable = false;
        }
    }
    if (stable) break;
  }
  return {v.data(), v.data() + n};
}

Transition tr(double x, int a, double r, double x2, bool terminal) {
  Transition t;
  t.s = VecX::Constant(1, x);
  t.a = a;
  t.r = r;
  t.s2 = VecX::Constant(1, x2);
  t.terminal = terminal;
  t.steps = 30;
  return t;
}

// At x = 0, action 0 swings for 0.5 and ends the episode; action 1 walks
// one unit per step and pays 1 on reaching x = 10.
std::vector<Transition> swing_vs_go() {
  std::vector<Transition> out;
  for (int copy = 0; copy < 5; ++copy) {
    out.push_back(tr(0.0, 0, 0.5, 0.0, true));
    for (int x = 0; x < 10; ++x) out.push_back(tr(x, 1, x + 1 == 10 ? 1.0 : 0.0, x + 1, x + 1 == 10));
  }
  return out;
}

Outcome dac_oracle() {
  std::mt19937_64 rng(61);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_mdp(rng, 20, 3);
    const auto vi = value_iteration(m, 0.95, 1e-10);
    const auto oracle = dense_fixed_point(m, 0.95);
    for (int s = 0; s < 20; ++s) worst = std::max(worst, std::abs(vi.values[s] - oracle[s]));
  }
  int right = 0, cells = 0;
  for (int k : {1, 3, 5}) {
    for (double c : {0.0, 0.1, 1.0}) {
      ++cells;
      DacConfig cfg;
      cfg.k = k;
      cfg.cost = c;
      cfg.gamma = 0.9;
      DacMdp impatient(swing_vs_go(), 2, cfg);
      impatient.solve();
      cfg.gamma = 0.999;
      DacMdp patient(swing_vs_go(), 2, cfg);
      patient.solve();
      right += impatient.greedy_action(VecX::Zero(1)) == 0 && patient.greedy_action(VecX::Zero(1)) == 1;
    }
  }
  return {worst < 1e-6 && right == cells,
          fmt("max |V_vi - V_dense| %.1e over 100 MDPs; swing at 0.9 and go at 0.999 in %d/%d (k, C) cells", worst,
              right, cells)};
}

// Abstract-state distances are in metres while goto rewards live in [0, 1];
// C = 0.1 keeps the distance penalty from swamping the task signal.
Outcome reward_flip() {
  KinematicRunner runner(10.0);
  TaskParams task;
  CollectConfig cc;
  cc.episodes = 200;
  cc.seed = 5;
  const auto actions = default_action_set();
  const auto data = collect_transitions(runner, actions, task, cc);
  DacConfig cfg;
  cfg.cost = 0.1;
  DacMdp seek(data, static_cast<int>(actions.size()), cfg);
  DacMdp avoid(data, static_cast<int>(actions.size()), cfg, [](const Transition& t) { return -t.r; });
  seek.solve();
  avoid.solve();

  // +1 toward the goal, -1 away, 0 for finishing clips.
  auto direction = [&](int a, const Vec2& to_goal) {
    if (actions[a].is_clip) return 0;
    const double h = actions[a].command.heading;
    return std::cos(h) * to_goal.x() + std::sin(h) * to_goal.y() > 0.0 ? 1 : -1;
  };
  int far = 0, differ = 0, toward = 0, away = 0;
  for (const auto& t : data) {
    const Vec2 g = t.s.head<2>();
    if (g.norm() < 2.0) continue;
    ++far;
    const int a = seek.greedy_action(t.s), b = avoid.greedy_action(t.s);
    differ += a != b;
    toward += direction(a, g) == 1;
    away += direction(b, g) == -1;
  }

  // Greedy rollouts from >= 2 m: r closes in, -r opens up.
  std::mt19937_64 rng(77);
  int closer = 0, further = 0;
  const int episodes = 20;
  for (int e = 0; e < episodes; ++e) {
    for (DacMdp* m : {&seek, &avoid}) {
      KinematicRunner r(8.0);
      std::mt19937_64 start(rng());
      CharacterState c = r.reset(start);
      while (c.position.norm() < 2.0) c = r.reset(start);
      const double d0 = c.position.norm();
      for (int i = 0; i < 10; ++i)
        c = r.run(actions[m->greedy_action(abstract_state(c, Vec2::Zero()).features())], 30);
      if (m == &seek && c.position.norm() < d0) ++closer;
      if (m == &avoid && c.position.norm() > d0) ++further;
    }
  }
  const double n = far ? far : 1.0;
  const bool ok = data.size() >= 500 && far > 0 && differ >= 0.9 * far && toward >= 0.9 * far &&
                  closer >= 0.9 * episodes && further >= 0.9 * episodes;
  return {ok, fmt("%zu transitions, %d states >= 2 m: differ %.3f, r heads toward %.3f, -r heads away %.3f; "
                  "rollouts closer %d/%d under r, further %d/%d under -r",
                  data.size(), far, differ / n, toward / n, away / n, closer, episodes, further, episodes)};
}

const Register r4(4, "dac-oracle", "value iteration against a dense solver; swing versus go", 30.0, dac_oracle);
const Register r5(5, "reward-flip", "negated goto reward flips greedy headings", 120.0, reward_flip);

}  // namespace
}  // namespace mhc::acceptance
