#include "mhc/planner/task.hpp"

#include "mhc/directive/episode.hpp"
#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"
#include "mhc/motion/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mhc::planner {

namespace {

constexpr double kDt = 1.0 / 30.0;
constexpr int kHorizon = 10;

double wrap(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

VecX AbstractState::features() const {
  VecX f(kDim);
  f << to_goal.x(), to_goal.y(), velocity.x(), velocity.y(), facing, height;
  return f;
}

AbstractState abstract_state(const CharacterState& c, const Vec2& goal) {
  AbstractState s;
  s.to_goal = goal - c.position;
  s.velocity = c.velocity;
  s.facing = wrap(c.facing);
  s.height = c.height;
  s.fallen = c.fallen;
  return s;
}

std::vector<DirectiveAction> default_action_set() {
  std::vector<DirectiveAction> out;
  static const char* dirs[] = {"e", "ne", "n", "nw", "w", "sw", "s", "se"};
  for (int k = 0; k < 8; ++k) {
    const double h = wrap(k * std::numbers::pi / 4.0);
    DirectiveAction run;
    run.id = static_cast<int>(out.size());
    run.name = std::string("run_") + dirs[k];
    run.command = {kRunSpeed, h, h, kRunHeight};
    out.push_back(run);
    DirectiveAction crouch;
    crouch.id = static_cast<int>(out.size());
    crouch.name = std::string("crouch_") + dirs[k];
    crouch.command = {kCrouchSpeed, h, h, kCrouchHeight};
    out.push_back(crouch);
  }
  for (int c = 0; c < 2; ++c) {
    DirectiveAction fin;
    fin.id = static_cast<int>(out.size());
    fin.name = "finish_" + std::to_string(c);
    fin.is_clip = true;
    fin.clip = c;
    out.push_back(fin);
  }
  return out;
}

std::string to_string(TaskKind k) { return k == TaskKind::kGoto ? "goto" : "heading"; }

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "goto") return TaskKind::kGoto;
  if (s == "heading") return TaskKind::kHeading;
  throw std::invalid_argument("unknown task '" + s + "' (goto, heading)");
}

double task_reward(const TaskParams& task, const CharacterState& c) {
  if (task.kind == TaskKind::kGoto) return std::exp(-0.5 * (task.goal - c.position).norm());
  const Vec2 want = task.speed * Vec2(std::cos(task.direction), std::sin(task.direction));
  return 0.6 * std::exp(-2.0 * (c.velocity - want).norm()) + 0.2 * std::exp(-2.0 * std::abs(wrap(c.facing - task.facing))) +
         0.2 * std::exp(-8.0 * std::abs(c.height - task.height));
}

CharacterState KinematicRunner::reset(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius_ * std::sqrt(u(rng));
  const double th = 2.0 * std::numbers::pi * u(rng);
  s_ = CharacterState{};
  s_.position = centre_ + r * Vec2(std::cos(th), std::sin(th));
  s_.facing = wrap(2.0 * std::numbers::pi * u(rng));
  s_.height = kRunHeight;
  return s_;
}

CharacterState KinematicRunner::run(const DirectiveAction& action, int steps) {
  RootCommand cmd = action.command;
  if (action.is_clip) cmd = {0.0, s_.facing, s_.facing, kRunHeight};
  const Vec2 want = cmd.speed * Vec2(std::cos(cmd.heading), std::sin(cmd.heading));
  constexpr double blend = 0.2, max_turn = 3.0 * kDt;
  for (int t = 0; t < steps; ++t) {
    s_.velocity += blend * (want - s_.velocity);
    s_.position += kDt * s_.velocity;
    s_.facing = wrap(s_.facing + std::clamp(wrap(cmd.facing - s_.facing), -max_turn, max_turn));
    s_.height += blend * (cmd.height - s_.height);
  }
  return s_;
}

CharacterState PolicyRunner::summary() const {
  CharacterState c;
  const auto& p = state_.pose;
  c.position = p.root.position.head<2>();
  c.velocity = p.root.linear_velocity.head<2>();
  c.facing = motion::yaw_of(p.root.rotation());
  c.height = p.height();
  c.fallen = state_.fallen;
  return c;
}

CharacterState PolicyRunner::reset(std::mt19937_64& rng) {
  if (data_.empty()) throw DatasetTooSmall("policy runner needs a dataset for initial poses");
  const auto& idx = data_.index();
  const auto ref = idx[std::uniform_int_distribution<std::size_t>(0, idx.size() - 1)(rng)];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius_ * std::sqrt(u(rng));
  const double th = 2.0 * std::numbers::pi * u(rng);
  const Pose& src = data_.frame(ref);
  const Vec2 root = src.root.position.head<2>();
  Pose p = motion::rotate_pose_inplane(src, 2.0 * std::numbers::pi * u(rng), root);
  p = motion::translate_pose(p, Vec3(r * std::cos(th) - root.x(), r * std::sin(th) - root.y(), 0.0));
  state_ = sim_.reset(p);
  return summary();
}

CharacterState PolicyRunner::run(const DirectiveAction& action, int steps) {
  const int J = sim_.skeleton().joint_count();
  directive::Directive d;
  if (action.is_clip) {
    if (action.clip < 0 || action.clip >= data_.size())
      throw InvalidDirective("finishing clip " + std::to_string(action.clip) + " not in dataset");
    const auto& clip = data_.clips()[action.clip];
    const Pose& first = clip.frames.front();
    const Vec2 pivot = first.root.position.head<2>();
    const double yaw = motion::yaw_of(state_.pose.root.rotation()) - motion::yaw_of(first.root.rotation());
    auto placed = motion::apply_inplane_rotation(clip, yaw, pivot);
    const Vec2 here = state_.pose.root.position.head<2>();
    for (auto& f : placed.frames) f = motion::translate_pose(f, Vec3(here.x() - pivot.x(), here.y() - pivot.y(), 0.0));
    d.frames = std::move(placed.frames);
    d.mask = directive::channel_mask_from_menu(0, J);
    d.horizon = kHorizon;
  } else {
    d = directive::joystick_directive(action.command, steps + kHorizon, J, kHorizon);
  }
  for (int t = 0; t < steps; ++t) state_ = sim_.step(state_, bundle_.act(state_.pose, d, t)).first;
  return summary();
}

void CollectConfig::validate() const {
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (actions_per_episode < 1) throw std::invalid_argument("actions_per_episode must be >= 1");
  if (min_hold < 1 || max_hold < min_hold) throw std::invalid_argument("hold range must satisfy 1 <= min <= max");
}

std::vector<Transition> collect_transitions(DirectiveRunner& runner, const std::vector<DirectiveAction>& actions,
                                            const TaskParams& task, const CollectConfig& cfg) {
  cfg.validate();
  if (actions.empty()) throw std::invalid_argument("collect_transitions needs at least one action");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(actions.size()) - 1);
  std::uniform_int_distribution<int> hold(cfg.min_hold, cfg.max_hold);
  std::vector<Transition> out;
  for (int e = 0; e < cfg.episodes; ++e) {
    CharacterState c = runner.reset(rng);
    for (int k = 0; k < cfg.actions_per_episode; ++k) {
      Transition t;
      t.s = abstract_state(c, task.goal).features();
      t.a = pick(rng);
      t.steps = hold(rng);
      c = runner.run(actions[t.a], t.steps);
      t.r = task_reward(task, c);
      t.s2 = abstract_state(c, task.goal).features();
      t.terminal = c.fallen;
      out.push_back(std::move(t));
      if (c.fallen) break;
    }
  }
  return out;
}

nlohmann::json to_json(const Transition& t) {
  return {{"s", std::vector<double>(t.s.data(), t.s.data() + t.s.size())},
          {"a", t.a},
          {"r", t.r},
          {"s2", std::vector<double>(t.s2.data(), t.s2.data() + t.s2.size())},
          {"terminal", t.terminal},
          {"steps", t.steps}};
}

Transition transition_from_json(const nlohmann::json& j) {
  try {
    Transition t;
    const auto s = j.at("s").get<std::vector<double>>();
    const auto s2 = j.at("s2").get<std::vector<double>>();
    if (s.size() != s2.size() || s.empty()) throw SchemaError("transition: s and s2 differ in length");
    t.s = Eigen::Map<const VecX>(s.data(), static_cast<Eigen::Index>(s.size()));
    t.s2 = Eigen::Map<const VecX>(s2.data(), static_cast<Eigen::Index>(s2.size()));
    t.a = j.at("a").get<int>();
    t.r = j.at("r").get<double>();
    t.terminal = j.value("terminal", false);
    t.steps = j.value("steps", 0);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("transition: ") + e.what());
  }
}

}  // namespace mhc::planner
