#pragma once

#include "mhc/dataset/dataset.hpp"
#include "mhc/directive/joystick.hpp"
#include "mhc/learn/policy.hpp"
#include "mhc/sim/sim.hpp"
#include "mhc/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mhc::planner {

using directive::RootCommand;
using motion::Pose;

/// Planar character summary a runner reports after each directive.
struct CharacterState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double facing = 0.0;
  double height = 0.85;
  bool fallen = false;
};

/// Features: goal-relative planar position, planar velocity, facing, height.
struct AbstractState {
  Vec2 to_goal = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double facing = 0.0;
  double height = 0.0;
  bool fallen = false;  // carried for FSM predicates, not a feature

  static constexpr int kDim = 6;
  VecX features() const;
  double goal_distance() const { return to_goal.norm(); }
};

AbstractState abstract_state(const CharacterState& c, const Vec2& goal);

/// A joystick template or a finishing clip.
struct DirectiveAction {
  int id = 0;
  std::string name;
  bool is_clip = false;
  RootCommand command;
  int clip = 0;  // dataset clip index when is_clip
};

inline constexpr double kRunSpeed = 2.5;
inline constexpr double kRunHeight = 0.85;
inline constexpr double kCrouchSpeed = 1.0;
inline constexpr double kCrouchHeight = 0.4;

/// 8 headings x {run 2.5 m/s at 0.85 m, crouch 1 m/s at 0.4 m}, then two
/// finishing clips (dataset clips 0 and 1): 18 actions, ids 0..17.
std::vector<DirectiveAction> default_action_set();

enum class TaskKind { kGoto, kHeading };

struct TaskParams {
  TaskKind kind = TaskKind::kGoto;
  Vec2 goal = Vec2::Zero();
  double direction = 0.0;  // heading task: travel direction (rad)
  double speed = kRunSpeed;
  double facing = 0.0;
  double height = kRunHeight;
};

std::string to_string(TaskKind k);
/// Throws std::invalid_argument.
TaskKind task_kind_from_string(const std::string& s);

/// goto: exp(-0.5 d); heading: 0.6 exp(-2|v - speed dir|) + 0.2 exp(-2|facing err|)
/// + 0.2 exp(-8|height err|).
double task_reward(const TaskParams& task, const CharacterState& c);

/// Executes directives on some character, one action at a time.
class DirectiveRunner {
 public:
  virtual ~DirectiveRunner() = default;
  virtual CharacterState reset(std::mt19937_64& rng) = 0;
  /// Runs `action` for `steps` control steps and returns the state after.
  virtual CharacterState run(const DirectiveAction& action, int steps) = 0;
};

/// Scripted point-mass stand-in for the controller: velocity, facing and
/// height relax toward the command every 1/30 s.
class KinematicRunner : public DirectiveRunner {
 public:
  explicit KinematicRunner(double arena_radius = 10.0, Vec2 centre = Vec2::Zero())
      : radius_(arena_radius), centre_(centre) {}
  CharacterState reset(std::mt19937_64& rng) override;
  CharacterState run(const DirectiveAction& action, int steps) override;
  CharacterState& state() { return s_; }

 private:
  double radius_;
  Vec2 centre_;
  CharacterState s_;
};

/// The trained controller in the simulator. Joystick actions become
/// root-field directives, clip actions the dataset clip placed at the
/// character.
class PolicyRunner : public DirectiveRunner {
 public:
  PolicyRunner(const learn::PolicyBundle& bundle, const sim::Simulator& sim, const dataset::MotionDataset& data,
               double arena_radius = 10.0)
      : bundle_(bundle), sim_(sim), data_(data), radius_(arena_radius) {}
  CharacterState reset(std::mt19937_64& rng) override;
  CharacterState run(const DirectiveAction& action, int steps) override;

 private:
  CharacterState summary() const;

  const learn::PolicyBundle& bundle_;
  const sim::Simulator& sim_;
  const dataset::MotionDataset& data_;
  double radius_;
  sim::SimState state_;
};

struct Transition {
  VecX s;
  int a = 0;
  double r = 0.0;
  VecX s2;
  bool terminal = false;
  int steps = 0;  // control steps the action was held
};

struct CollectConfig {
  int episodes = 50;
  int actions_per_episode = 12;
  int min_hold = 30;
  int max_hold = 90;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Uniformly random action switches with Uniform[min_hold, max_hold] hold
/// times; logs (s, a, task reward, s') at action boundaries. A fall ends
/// the episode with a terminal transition.
std::vector<Transition> collect_transitions(DirectiveRunner& runner, const std::vector<DirectiveAction>& actions,
                                            const TaskParams& task, const CollectConfig& cfg);

nlohmann::json to_json(const Transition& t);
Transition transition_from_json(const nlohmann::json& j);

}  // namespace mhc::planner
