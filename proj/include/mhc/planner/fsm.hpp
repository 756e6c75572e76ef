#pragma once

#include "mhc/planner/task.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mhc::planner {

/// What a state asks the controller to do. toward_goal steers the joystick
/// at the goal; hold stands in place facing the current way.
struct FsmEmit {
  enum class Kind { kTowardGoal, kJoystick, kClip, kHold };
  Kind kind = Kind::kHold;
  RootCommand command;  // joystick; speed and height also used by toward_goal
  int clip = 0;
};

struct FsmPredicate {
  enum class Kind { kDistanceBelow, kDistanceAbove, kTimeAbove, kFallen, kNotFallen, kAlways };
  Kind kind = Kind::kAlways;
  double value = 0.0;  // metres or seconds

  bool holds(const AbstractState& s, double time_in_state) const;
};

struct FsmTransition {
  FsmPredicate when;
  int to = 0;
};

struct FsmState {
  std::string name;
  FsmEmit emit;
  std::vector<FsmTransition> transitions;  // evaluated in order
};

struct FsmSpec {
  std::vector<FsmState> states;
  int start = 0;

  /// Throws SchemaError.
  void validate() const;
  int index_of(const std::string& name) const;  // -1 if absent
};

/// "mhc-fsm/1". Throws SchemaError.
FsmSpec fsm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FsmSpec& f);
FsmSpec load_fsm(const std::filesystem::path& path);

/// Run toward the goal; within `finish_radius` play the finishing clip, then hold.
FsmSpec goto_fsm(double finish_radius = 0.5, int finish_clip = 0);

struct FsmRuntime {
  int state = 0;
  double time_in_state = 0.0;
};

FsmRuntime fsm_start(const FsmSpec& f);

/// Advances the state timer by dt, takes the first transition whose
/// predicate holds, and returns the (new) current state's directive.
DirectiveAction fsm_step(const FsmSpec& f, FsmRuntime& rt, const AbstractState& s, double dt);

struct FsmTrace {
  std::vector<int> states;
  std::vector<double> goal_distance;
  std::vector<CharacterState> characters;
};

/// Decision every `steps` control steps for `decisions` decisions.
FsmTrace fsm_rollout(const FsmSpec& f, DirectiveRunner& runner, const Vec2& goal, int decisions, int steps,
                     std::mt19937_64& rng);

}  // namespace mhc::planner
