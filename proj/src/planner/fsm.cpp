#include "mhc/planner/fsm.hpp"

#include "mhc/errors.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace mhc::planner {

namespace {

constexpr double kDecisionDt = 1.0 / 30.0;

const std::map<std::string, FsmEmit::Kind> kEmitKinds{{"toward_goal", FsmEmit::Kind::kTowardGoal},
                                                      {"joystick", FsmEmit::Kind::kJoystick},
                                                      {"clip", FsmEmit::Kind::kClip},
                                                      {"hold", FsmEmit::Kind::kHold}};

const std::map<std::string, FsmPredicate::Kind> kPredicateKinds{
    {"distance_below", FsmPredicate::Kind::kDistanceBelow}, {"distance_above", FsmPredicate::Kind::kDistanceAbove},
    {"time_above", FsmPredicate::Kind::kTimeAbove},         {"fallen", FsmPredicate::Kind::kFallen},
    {"not_fallen", FsmPredicate::Kind::kNotFallen},         {"always", FsmPredicate::Kind::kAlways}};

template <class E>
std::string name_of(const std::map<std::string, E>& table, E v) {
  for (const auto& [k, e] : table)
    if (e == v) return k;
  return "?";
}

template <class E>
E lookup(const std::map<std::string, E>& table, const std::string& s, const char* what) {
  const auto it = table.find(s);
  if (it == table.end()) throw SchemaError(std::string("fsm: unknown ") + what + " '" + s + "'");
  return it->second;
}

bool finite_command(const RootCommand& c) {
  return std::isfinite(c.speed) && std::isfinite(c.heading) && std::isfinite(c.facing) && std::isfinite(c.height);
}

}  // namespace

bool FsmPredicate::holds(const AbstractState& s, double time_in_state) const {
  switch (kind) {
    case Kind::kDistanceBelow: return s.goal_distance() < value;
    case Kind::kDistanceAbove: return s.goal_distance() > value;
    case Kind::kTimeAbove: return time_in_state > value;
    case Kind::kFallen: return s.fallen;
    case Kind::kNotFallen: return !s.fallen;
    case Kind::kAlways: return true;
  }
  return false;
}

int FsmSpec::index_of(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(states.size()); ++i)
    if (states[i].name == name) return i;
  return -1;
}

void FsmSpec::validate() const {
  if (states.empty()) throw SchemaError("fsm: no states");
  if (start < 0 || start >= static_cast<int>(states.size())) throw SchemaError("fsm: start state out of range");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const FsmState& st = states[i];
    if (st.name.empty()) throw SchemaError("fsm: state " + std::to_string(i) + " has no name");
    if (index_of(st.name) != static_cast<int>(i)) throw SchemaError("fsm: duplicate state '" + st.name + "'");
    if (!finite_command(st.emit.command)) throw SchemaError("fsm: state '" + st.name + "' has a non-finite command");
    if (st.emit.kind == FsmEmit::Kind::kClip && st.emit.clip < 0)
      throw SchemaError("fsm: state '" + st.name + "' references a negative clip");
    for (const auto& t : st.transitions) {
      if (t.to < 0 || t.to >= static_cast<int>(states.size()))
        throw SchemaError("fsm: state '" + st.name + "' transitions to an undefined state");
      if (!std::isfinite(t.when.value)) throw SchemaError("fsm: non-finite predicate value in '" + st.name + "'");
    }
  }
}

FsmSpec fsm_from_json(const nlohmann::json& j) {
  FsmSpec f;
  try {
    if (j.at("schema").get<std::string>() != "mhc-fsm/1") throw SchemaError("fsm: schema must be mhc-fsm/1");
    const auto& states = j.at("states");
    for (const auto& s : states) f.states.push_back({s.at("name").get<std::string>(), {}, {}});
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto& s = states[i];
      FsmState& st = f.states[i];
      const auto& e = s.at("emit");
      st.emit.kind = lookup(kEmitKinds, e.at("kind").get<std::string>(), "emit kind");
      st.emit.command.speed = e.value("speed", st.emit.command.speed);
      st.emit.command.heading = e.value("heading", st.emit.command.heading);
      st.emit.command.facing = e.value("facing", st.emit.command.facing);
      st.emit.command.height = e.value("height", st.emit.command.height);
      if (st.emit.kind == FsmEmit::Kind::kClip) st.emit.clip = e.at("clip").get<int>();
      for (const auto& t : s.value("transitions", nlohmann::json::array())) {
        FsmTransition tr;
        tr.when.kind = lookup(kPredicateKinds, t.at("when").get<std::string>(), "predicate");
        tr.when.value = t.value("value", 0.0);
        const std::string to = t.at("to").get<std::string>();
        tr.to = f.index_of(to);
        if (tr.to < 0) throw SchemaError("fsm: transition to undefined state '" + to + "'");
        st.transitions.push_back(tr);
      }
    }
    const std::string start = j.at("start").get<std::string>();
    f.start = f.index_of(start);
    if (f.start < 0) throw SchemaError("fsm: undefined start state '" + start + "'");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("fsm: ") + e.what());
  }
  f.validate();
  return f;
}

nlohmann::json to_json(const FsmSpec& f) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& st : f.states) {
    nlohmann::json e{{"kind", name_of(kEmitKinds, st.emit.kind)}};
    if (st.emit.kind == FsmEmit::Kind::kClip) {
      e["clip"] = st.emit.clip;
    } else {
      e["speed"] = st.emit.command.speed;
      e["height"] = st.emit.command.height;
      if (st.emit.kind == FsmEmit::Kind::kJoystick) {
        e["heading"] = st.emit.command.heading;
        e["facing"] = st.emit.command.facing;
      }
    }
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : st.transitions)
      ts.push_back({{"when", name_of(kPredicateKinds, t.when.kind)}, {"value", t.when.value},
                    {"to", f.states[t.to].name}});
    states.push_back({{"name", st.name}, {"emit", e}, {"transitions", ts}});
  }
  return {{"schema", "mhc-fsm/1"}, {"start", f.states.at(f.start).name}, {"states", states}};
}

FsmSpec load_fsm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return fsm_from_json(j);
}

FsmSpec goto_fsm(double finish_radius, int finish_clip) {
  FsmSpec f;
  FsmState run{"run", {FsmEmit::Kind::kTowardGoal, {kRunSpeed, 0.0, 0.0, kRunHeight}, 0}, {}};
  FsmState finish{"finish", {FsmEmit::Kind::kClip, {}, finish_clip}, {}};
  FsmState done{"done", {FsmEmit::Kind::kHold, {0.0, 0.0, 0.0, kRunHeight}, 0}, {}};
  run.transitions.push_back({{FsmPredicate::Kind::kDistanceBelow, finish_radius}, 1});
  finish.transitions.push_back({{FsmPredicate::Kind::kTimeAbove, 2.0}, 2});
  f.states = {run, finish, done};
  f.start = 0;
  return f;
}

FsmRuntime fsm_start(const FsmSpec& f) { return {f.start, 0.0}; }

DirectiveAction fsm_step(const FsmSpec& f, FsmRuntime& rt, const AbstractState& s, double dt) {
  rt.time_in_state += dt;
  for (const auto& t : f.states.at(rt.state).transitions) {
    if (t.when.holds(s, rt.time_in_state)) {
      rt.state = t.to;
      rt.time_in_state = 0.0;
      break;
    }
  }
  const FsmState& st = f.states[rt.state];
  DirectiveAction a;
  a.id = -1;
  a.name = st.name;
  switch (st.emit.kind) {
    case FsmEmit::Kind::kTowardGoal: {
      const double h = std::atan2(s.to_goal.y(), s.to_goal.x());
      a.command = {st.emit.command.speed, h, h, st.emit.command.height};
      break;
    }
    case FsmEmit::Kind::kJoystick: a.command = st.emit.command; break;
    case FsmEmit::Kind::kClip:
      a.is_clip = true;
      a.clip = st.emit.clip;
      break;
    case FsmEmit::Kind::kHold: a.command = {0.0, s.facing, s.facing, st.emit.command.height}; break;
  }
  return a;
}

FsmTrace fsm_rollout(const FsmSpec& f, DirectiveRunner& runner, const Vec2& goal, int decisions, int steps,
                     std::mt19937_64& rng) {
  f.validate();
  if (decisions < 0 || steps < 1) throw std::invalid_argument("fsm_rollout: decisions >= 0 and steps >= 1");
  FsmTrace trace;
  FsmRuntime rt = fsm_start(f);
  CharacterState c = runner.reset(rng);
  double dt = 0.0;
  for (int i = 0; i < decisions; ++i) {
    const AbstractState s = abstract_state(c, goal);
    const DirectiveAction a = fsm_step(f, rt, s, dt);
    trace.states.push_back(rt.state);
    trace.goal_distance.push_back(s.goal_distance());
    trace.characters.push_back(c);
    c = runner.run(a, steps);
    dt = steps * kDecisionDt;
    if (c.fallen) break;
  }
  return trace;
}

}  // namespace mhc::planner
