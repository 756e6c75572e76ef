#include "cli_common.hpp"

#include "mhc/learn/policy.hpp"
#include "mhc/motion/io.hpp"
#include "mhc/planner/dac_mdp.hpp"
#include "mhc/planner/fsm.hpp"

#include <cstdio>
#include <fstream>
#include <memory>

namespace mhc::cli {

namespace {

using namespace planner;

inline constexpr const char* kTransitionSchema = "mhc-transitions/1";

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

struct RunnerOpts {
  std::string runner = "kinematic", checkpoint;
  double radius = 10.0;

  void add(CLI::App* c) {
    c->add_option("--runner", runner, "kinematic (scripted point mass) or policy")
        ->check(CLI::IsMember({"kinematic", "policy"}));
    c->add_option("--checkpoint", checkpoint, "Policy checkpoint for --runner policy");
    c->add_option("--radius", radius, "Start positions are uniform in this disc (m)")->check(CLI::PositiveNumber);
  }
};

// Owns everything a PolicyRunner borrows.
struct RunnerHolder {
  learn::PolicyBundle bundle;
  std::unique_ptr<sim::Simulator> sim;
  std::unique_ptr<dataset::MotionDataset> data;
  std::unique_ptr<DirectiveRunner> runner;
};

std::unique_ptr<RunnerHolder> make_runner(const RunnerOpts& o) {
  auto h = std::make_unique<RunnerHolder>();
  if (o.runner == "kinematic") {
    h->runner = std::make_unique<KinematicRunner>(o.radius);
    return h;
  }
  if (o.checkpoint.empty()) throw UsageError("--runner policy needs --checkpoint");
  h->bundle = learn::load_policy(o.checkpoint);
  const auto skel = motion::sim13();
  if (h->bundle.joint_count() != skel.joint_count()) throw SchemaError("policy runner expects a sim13 checkpoint");
  h->sim = std::make_unique<sim::Simulator>(skel, sim::SimConfig{});
  h->data = std::make_unique<dataset::MotionDataset>(dataset_or_synthetic("", skel, 4, 300));
  h->runner = std::make_unique<PolicyRunner>(h->bundle, *h->sim, *h->data, o.radius);
  return h;
}

struct TaskOpts {
  std::string task = "goto", goal = "0,0";
  double direction = 0.0, speed = kRunSpeed, facing = 0.0, height = kRunHeight;

  void add(CLI::App* c) {
    c->add_option("--task", task, "goto or heading")->check(CLI::IsMember({"goto", "heading"}));
    c->add_option("--goal", goal, "Goal x,y (m)");
    c->add_option("--direction", direction, "Heading task: travel direction (rad)");
    c->add_option("--speed", speed, "Heading task: target speed (m/s)");
    c->add_option("--facing", facing, "Heading task: target facing (rad)");
    c->add_option("--height", height, "Heading task: target root height (m)");
  }
  TaskParams params() const {
    TaskParams t;
    t.kind = task_kind_from_string(task);
    t.goal = parse_xy(goal);
    t.direction = direction;
    t.speed = speed;
    t.facing = facing;
    t.height = height;
    return t;
  }
};

nlohmann::json task_json(const TaskParams& t) {
  return {{"kind", to_string(t.kind)}, {"goal", {t.goal.x(), t.goal.y()}}, {"direction", t.direction},
          {"speed", t.speed},          {"facing", t.facing},                {"height", t.height}};
}

void add_plan(CLI::App& app) {
  auto* plan = app.add_subcommand("plan", "DAC-MDP planning over directives");
  plan->require_subcommand(1);
  {
    struct Opts {
      RunnerOpts runner;
      TaskOpts task;
      CollectConfig collect;
      std::optional<std::uint64_t> seed;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* c = plan->add_subcommand("collect", "Log transitions under uniformly random directive switches");
    o->runner.add(c);
    o->task.add(c);
    c->add_option("--episodes", o->collect.episodes, "Episodes")->check(CLI::NonNegativeNumber);
    c->add_option("--actions-per-episode", o->collect.actions_per_episode, "Directives per episode")
        ->check(CLI::PositiveNumber);
    c->add_option("--min-hold", o->collect.min_hold, "Shortest hold (control steps)")->check(CLI::PositiveNumber);
    c->add_option("--max-hold", o->collect.max_hold, "Longest hold (control steps)")->check(CLI::PositiveNumber);
    c->add_option("--seed", o->seed, "Seed (overrides MHC_SEED)");
    c->add_option("--out", o->out, "Transition file")->required();
    c->callback([o] {
      auto cc = o->collect;
      cc.seed = resolve_seed(cc.seed, o->seed);
      const auto task = o->task.params();
      auto h = make_runner(o->runner);
      const auto actions = default_action_set();
      const auto data = collect_transitions(*h->runner, actions, task, cc);
      nlohmann::json ts = nlohmann::json::array();
      for (const auto& t : data) ts.push_back(to_json(t));
      motion::write_json_file({{"schema", kTransitionSchema},
                               {"task", task_json(task)},
                               {"actions", actions.size()},
                               {"seed", cc.seed},
                               {"transitions", ts}},
                              o->out);
      print_json({{"out", o->out}, {"transitions", data.size()}, {"seed", cc.seed}});
    });
  }
  {
    struct Opts {
      std::string transitions, out;
      DacConfig cfg;
      bool negate = false;
    };
    auto o = std::make_shared<Opts>();
    auto* c = plan->add_subcommand("build", "Compile logged transitions into a DAC-MDP");
    c->add_option("--transitions", o->transitions, "Transition file")->required();
    c->add_option("--k", o->cfg.k, "Neighbours per action")->check(CLI::PositiveNumber);
    c->add_option("--cost", o->cfg.cost, "Penalty per unit distance to the data")->check(CLI::NonNegativeNumber);
    c->add_option("--gamma", o->cfg.gamma, "Discount in [0, 1)");
    c->add_option("--tol", o->cfg.tol, "Value iteration tolerance")->check(CLI::PositiveNumber);
    c->add_option("--max-iters", o->cfg.max_iters, "Value iteration sweep limit")->check(CLI::PositiveNumber);
    c->add_flag("--negate", o->negate, "Use the negated task reward");
    c->add_option("--out", o->out, "DAC-MDP file")->required();
    c->callback([o] {
      const auto j = motion::read_json_file(o->transitions);
      motion::expect_schema(j, kTransitionSchema);
      std::vector<Transition> data;
      int actions = 0;
      try {
        actions = j.at("actions").get<int>();
        for (const auto& t : j.at("transitions")) data.push_back(transition_from_json(t));
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(o->transitions + ": " + e.what());
      }
      try {
        o->cfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      RewardFn relabel;
      if (o->negate) relabel = [](const Transition& t) { return -t.r; };
      const DacMdp m(std::move(data), actions, o->cfg, relabel);
      save_dac_mdp(m, o->out);
      print_json({{"out", o->out}, {"transitions", m.transitions().size()}, {"config", to_json(m.config())}});
    });
  }
  {
    struct Opts {
      std::string mdp, out;
    };
    auto o = std::make_shared<Opts>();
    auto* c = plan->add_subcommand("solve", "Value iteration on a DAC-MDP");
    c->add_option("--mdp", o->mdp, "DAC-MDP file")->required();
    c->add_option("--out", o->out, "Solved file (default: overwrite --mdp)");
    c->callback([o] {
      DacMdp m = load_dac_mdp(o->mdp);
      const auto& sol = m.solve();
      const std::string out = o->out.empty() ? o->mdp : o->out;
      save_dac_mdp(m, out);
      print_json({{"out", out},
                  {"iterations", sol.iterations},
                  {"residual", sol.residuals.empty() ? 0.0 : sol.residuals.back()}});
    });
  }
  {
    struct Opts {
      std::string mdp, csv, goal = "0,0";
      RunnerOpts runner;
      int decisions = 20, hold = 30;
      std::optional<std::uint64_t> seed;
    };
    auto o = std::make_shared<Opts>();
    auto* c = plan->add_subcommand("rollout", "Run the greedy policy of a solved DAC-MDP");
    c->add_option("--mdp", o->mdp, "Solved DAC-MDP file")->required();
    o->runner.add(c);
    c->add_option("--goal", o->goal, "Goal x,y (m)");
    c->add_option("--decisions", o->decisions, "Directive decisions")->check(CLI::PositiveNumber);
    c->add_option("--hold", o->hold, "Control steps per decision")->check(CLI::PositiveNumber);
    c->add_option("--seed", o->seed, "Seed for the start state (overrides MHC_SEED)");
    c->add_option("--csv", o->csv, "Output CSV")->required();
    c->callback([o] {
      const DacMdp m = load_dac_mdp(o->mdp);
      if (!m.solved()) throw UsageError(o->mdp + " is not solved; run `mhc plan solve` first");
      const Vec2 goal = parse_xy(o->goal);
      auto h = make_runner(o->runner);
      const auto actions = default_action_set();
      std::mt19937_64 rng(resolve_seed(1, o->seed));
      CharacterState c = h->runner->reset(rng);
      std::ofstream out(o->csv, std::ios::trunc);
      if (!out) throw Error("cannot write " + o->csv);
      out << "decision,x,y,goal_distance,action,name,fallen\n";
      const double start = (goal - c.position).norm();
      for (int i = 0; i < o->decisions && !c.fallen; ++i) {
        const auto s = abstract_state(c, goal);
        const int a = m.greedy_action(s.features());
        out << i << "," << fmt(c.position.x()) << "," << fmt(c.position.y()) << "," << fmt(s.goal_distance()) << ","
            << a << "," << actions.at(a).name << "," << c.fallen << "\n";
        c = h->runner->run(actions.at(a), o->hold);
      }
      print_json({{"csv", o->csv}, {"start_distance", start}, {"end_distance", (goal - c.position).norm()}, {"fallen", c.fallen}});
    });
  }
}

void add_fsm(CLI::App& app) {
  auto* fsm = app.add_subcommand("fsm", "Hand-authored directive state machines");
  fsm->require_subcommand(1);
  {
    auto out = std::make_shared<std::string>();
    auto* c = fsm->add_subcommand("template", "Write the built-in go-to FSM");
    c->add_option("--out", *out, "FSM file")->required();
    c->callback([out] {
      motion::write_json_file(to_json(goto_fsm()), *out);
      print_json({{"out", *out}});
    });
  }
  {
    auto in = std::make_shared<std::string>();
    auto* c = fsm->add_subcommand("check", "Validate an FSM file");
    c->add_option("file", *in, "FSM file")->required();
    c->callback([in] {
      const auto f = load_fsm(*in);
      print_json({{"states", f.states.size()}, {"start", f.states[f.start].name}});
    });
  }
  {
    struct Opts {
      std::string spec, csv, goal = "3,4";
      RunnerOpts runner;
      int decisions = 60, steps = 10;
      std::optional<std::uint64_t> seed;
    };
    auto o = std::make_shared<Opts>();
    auto* c = fsm->add_subcommand("run", "Execute an FSM with a runner");
    c->add_option("--spec", o->spec, "FSM file (default: built-in go-to)");
    o->runner.add(c);
    c->add_option("--goal", o->goal, "Goal x,y (m)");
    c->add_option("--decisions", o->decisions, "FSM steps")->check(CLI::PositiveNumber);
    c->add_option("--steps", o->steps, "Control steps per FSM step")->check(CLI::PositiveNumber);
    c->add_option("--seed", o->seed, "Seed for the start state (overrides MHC_SEED)");
    c->add_option("--csv", o->csv, "Output CSV")->required();
    c->callback([o] {
      const FsmSpec f = o->spec.empty() ? goto_fsm() : load_fsm(o->spec);
      auto h = make_runner(o->runner);
      std::mt19937_64 rng(resolve_seed(1, o->seed));
      const auto trace = fsm_rollout(f, *h->runner, parse_xy(o->goal), o->decisions, o->steps, rng);
      std::ofstream out(o->csv, std::ios::trunc);
      if (!out) throw Error("cannot write " + o->csv);
      out << "step,state,x,y,goal_distance,fallen\n";
      for (std::size_t i = 0; i < trace.states.size(); ++i)
        out << i << "," << f.states[trace.states[i]].name << "," << fmt(trace.characters[i].position.x()) << ","
            << fmt(trace.characters[i].position.y()) << "," << fmt(trace.goal_distance[i]) << ","
            << trace.characters[i].fallen << "\n";
      print_json({{"csv", o->csv},
                  {"steps", trace.states.size()},
                  {"final_state", trace.states.empty() ? "" : f.states[trace.states.back()].name},
                  {"final_distance", trace.goal_distance.empty() ? 0.0 : trace.goal_distance.back()}});
    });
  }
}

}  // namespace

void add_plan_commands(CLI::App& app) {
  add_plan(app);
  add_fsm(app);
}

}  // namespace mhc::cli
