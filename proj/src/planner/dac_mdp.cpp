#include "mhc/planner/dac_mdp.hpp"

#include "mhc/errors.hpp"
#include "mhc/learn/checkpoint.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mhc::planner {

void DacConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(cost >= 0.0)) throw std::invalid_argument("cost must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

nlohmann::json to_json(const DacConfig& c) {
  return {{"k", c.k}, {"cost", c.cost}, {"gamma", c.gamma}, {"tol", c.tol}, {"max_iters", c.max_iters}};
}

DacConfig dac_config_from_json(const nlohmann::json& j) {
  DacConfig c;
  try {
    c.k = j.value("k", c.k);
    c.cost = j.value("cost", c.cost);
    c.gamma = j.value("gamma", c.gamma);
    c.tol = j.value("tol", c.tol);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.validate();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("dac config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("dac config: ") + e.what());
  }
  return c;
}

DacMdp::DacMdp(std::vector<Transition> transitions, int num_actions, DacConfig cfg, const RewardFn& relabel)
    : data_(std::move(transitions)), by_action_(std::max(num_actions, 0)), num_actions_(num_actions), cfg_(cfg) {
  cfg_.validate();
  if (num_actions < 1) throw std::invalid_argument("num_actions must be >= 1");
  const Eigen::Index dim = data_.empty() ? 0 : data_.front().s.size();
  reward_.reserve(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const Transition& t = data_[i];
    if (t.a < 0 || t.a >= num_actions) throw std::invalid_argument("transition action outside the action set");
    if (t.s.size() != dim || t.s2.size() != dim) throw ShapeMismatch("transitions disagree in state dimension");
    by_action_[t.a].push_back(static_cast<int>(i));
    reward_.push_back(relabel ? relabel(t) : t.r);
  }
  for (int a = 0; a < num_actions; ++a)
    if (static_cast<int>(by_action_[a].size()) < cfg_.k)
      throw InsufficientData("action " + std::to_string(a) + " has " + std::to_string(by_action_[a].size()) +
                             " transitions, k = " + std::to_string(cfg_.k));
}

Neighborhood DacMdp::neighbors(const VecX& s, int a) const {
  if (a < 0 || a >= num_actions_) throw std::invalid_argument("action out of range");
  const auto& pool = by_action_[a];
  std::vector<std::pair<double, int>> d;
  d.reserve(pool.size());
  for (int i : pool) d.emplace_back((data_[i].s - s).norm(), i);
  const int k = cfg_.k;
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  Neighborhood n;
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    n.index.push_back(d[j].second);
    n.distance.push_back(d[j].first);
    n.weight.push_back(1.0 / (d[j].first + 1e-6));
    total += n.weight.back();
  }
  for (double& w : n.weight) w /= total;
  return n;
}

double DacMdp::reward(const VecX& s, int a) const {
  const Neighborhood n = neighbors(s, a);
  double r = 0.0;
  for (std::size_t j = 0; j < n.index.size(); ++j) r += n.weight[j] * (reward_[n.index[j]] - cfg_.cost * n.distance[j]);
  return r;
}

FiniteMdp DacMdp::compile() const {
  const int n = static_cast<int>(data_.size());
  if (n == 0) throw InsufficientData("no transitions");
  FiniteMdp m(n, num_actions_);
  for (int i = 0; i < n; ++i) {
    m.terminal[i] = data_[i].terminal;
    if (m.terminal[i]) continue;
    for (int a = 0; a < num_actions_; ++a) {
      const Neighborhood nb = neighbors(data_[i].s2, a);
      double r = 0.0;
      auto& next = m.next[m.at(i, a)];
      for (std::size_t j = 0; j < nb.index.size(); ++j) {
        r += nb.weight[j] * (reward_[nb.index[j]] - cfg_.cost * nb.distance[j]);
        next.emplace_back(nb.index[j], nb.weight[j]);
      }
      m.reward[m.at(i, a)] = r;
    }
  }
  return m;
}

const ValueIterationResult& DacMdp::solve() {
  solution_ = value_iteration(compile(), cfg_.gamma, cfg_.tol, cfg_.max_iters);
  solved_ = true;
  return solution_;
}

double DacMdp::q_value(const VecX& s, int a) const {
  if (!solved_) throw std::logic_error("DacMdp::q_value before solve()");
  const Neighborhood nb = neighbors(s, a);
  double q = 0.0;
  for (std::size_t j = 0; j < nb.index.size(); ++j) {
    const int i = nb.index[j];
    q += nb.weight[j] * (reward_[i] - cfg_.cost * nb.distance[j] + cfg_.gamma * solution_.values[i]);
  }
  return q;
}

int DacMdp::greedy_action(const VecX& s) const {
  int best_a = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < num_actions_; ++a) {
    const double q = q_value(s, a);
    if (q > best) {
      best = q;
      best_a = a;
    }
  }
  return best_a;
}

void save_dac_mdp(const DacMdp& m, const std::filesystem::path& path) {
  learn::TensorFile f;
  const auto& data = m.transitions();
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index dim = data.empty() ? 0 : data.front().s.size();
  f.meta = {{"kind", "mhc-dac-mdp"},      {"version", 1},   {"config", to_json(m.config())},
            {"num_actions", m.num_actions()}, {"dim", dim}, {"count", n},
            {"solved", m.solved()}};
  VecX s(n * dim), s2(n * dim), a(n), r(n), rs(n), term(n), steps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = data[i];
    s.segment(i * dim, dim) = t.s;
    s2.segment(i * dim, dim) = t.s2;
    a[i] = t.a;
    r[i] = t.r;
    rs[i] = m.reward_of(static_cast<int>(i));
    term[i] = t.terminal ? 1.0 : 0.0;
    steps[i] = t.steps;
  }
  f.tensors = {{"s", s}, {"s2", s2}, {"a", a}, {"r", r}, {"r_star", rs}, {"terminal", term}, {"steps", steps}};
  if (m.solved())
    f.tensors["values"] = Eigen::Map<const VecX>(m.values().data(), static_cast<Eigen::Index>(m.values().size()));
  learn::write_tensor_file(f, path);
}

DacMdp load_dac_mdp(const std::filesystem::path& path) {
  const learn::TensorFile f = learn::read_tensor_file(path);
  try {
    if (f.meta.at("kind") != "mhc-dac-mdp" || f.meta.at("version") != 1)
      throw SchemaError(path.string() + ": not an mhc-dac-mdp version 1 file");
    const auto n = f.meta.at("count").get<Eigen::Index>();
    const auto dim = f.meta.at("dim").get<Eigen::Index>();
    const VecX &s = f.at("s"), &s2 = f.at("s2"), &a = f.at("a"), &r = f.at("r"), &rs = f.at("r_star"),
               &term = f.at("terminal"), &steps = f.at("steps");
    if (s.size() != n * dim || s2.size() != n * dim || a.size() != n || r.size() != n || rs.size() != n ||
        term.size() != n || steps.size() != n)
      throw SchemaError(path.string() + ": tensor sizes disagree with the header");
    std::vector<Transition> data(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      data[i].s = s.segment(i * dim, dim);
      data[i].s2 = s2.segment(i * dim, dim);
      data[i].a = static_cast<int>(a[i]);
      data[i].r = r[i];
      data[i].terminal = term[i] != 0.0;
      data[i].steps = static_cast<int>(steps[i]);
    }
    DacMdp m(std::move(data), f.meta.at("num_actions").get<int>(), dac_config_from_json(f.meta.at("config")));
    for (Eigen::Index i = 0; i < n; ++i) m.reward_[i] = rs[i];
    if (f.meta.at("solved").get<bool>()) {
      const VecX& v = f.at("values");
      if (v.size() != n) throw SchemaError(path.string() + ": value table has the wrong size");
      m.solution_.values.assign(v.data(), v.data() + v.size());
      m.solved_ = true;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace mhc::planner
