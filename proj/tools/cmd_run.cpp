#include "cli_common.hpp"

#include "mhc/eval/protocol.hpp"
#include "mhc/learn/trainer.hpp"
#include "mhc/motion/io.hpp"
#include "mhc/reward/reward.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

namespace mhc::cli {

using motion::Pose;

namespace {

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

// Set points of zero: every joint driven toward its rest rotation.
class ZeroGenerator : public eval::MotionGenerator {
 public:
  explicit ZeroGenerator(const sim::Simulator& sim) : sim_(sim) {}
  std::vector<Pose> generate(const Pose& initial, const directive::Directive& d) const override {
    sim::Action zero{std::vector<Vec3>(sim_.skeleton().joint_count(), Vec3::Zero())};
    std::vector<Pose> out;
    sim::SimState s = sim_.reset(initial);
    out.push_back(s.pose);
    for (int t = 0; t + 1 < d.length(); ++t) {
      s = sim_.step(s, zero).first;
      out.push_back(s.pose);
    }
    return out;
  }

 private:
  const sim::Simulator& sim_;
};

void add_sim(CLI::App& app) {
  auto* sim = app.add_subcommand("sim", "Run the simulator");
  sim->require_subcommand(1);
  struct Opts {
    std::string skeleton, directive, policy = "zero", out, initial, sim_config;
  };
  auto o = std::make_shared<Opts>();
  auto* c = sim->add_subcommand("rollout", "Drive the character with a directive and write the motion as a clip");
  c->add_option("--skeleton", o->skeleton, "Skeleton file (default sim13)");
  c->add_option("--directive", o->directive, "Directive file")->required();
  c->add_option("--policy", o->policy, "Policy checkpoint, or 'zero' for rest set points");
  c->add_option("--out", o->out, "Output clip")->required();
  c->add_option("--initial", o->initial, "Clip whose first frame is the initial pose (default: standing)");
  c->add_option("--sim-config", o->sim_config, "JSON patch over the default simulator config");
  c->callback([o] {
    const auto skel = skeleton_or_default(o->skeleton);
    const sim::Simulator simulator(skel, sim::sim_config_from_json(merge_config(sim::to_json(sim::SimConfig{}), o->sim_config)));
    const auto d = directive::load_directive(o->directive, skel.joint_count());
    const Pose initial = o->initial.empty() ? standing_pose(skel) : motion::load_clip(o->initial, skel).frames.at(0);
    std::vector<Pose> frames;
    if (o->policy == "zero") {
      frames = ZeroGenerator(simulator).generate(initial, d);
    } else {
      const auto bundle = learn::load_policy(o->policy);
      if (bundle.joint_count() != skel.joint_count())
        throw SchemaError("policy expects " + std::to_string(bundle.joint_count()) + " joints, skeleton has " +
                          std::to_string(skel.joint_count()));
      frames = eval::PolicyGenerator(bundle, simulator).generate(initial, d);
    }
    int fallen = 0;
    for (const auto& p : frames) fallen += sim::detect_fall(p, simulator.config()) ? 1 : 0;
    motion::MotionClip clip;
    clip.name = "rollout";
    clip.fps = d.fps;
    clip.skeleton = skel.name();
    clip.frames = std::move(frames);
    clip.source = motion::ClipSource::kGenerated;
    motion::save_clip(clip, o->out);
    print_json({{"out", o->out}, {"frames", clip.length()}, {"fallen_frames", fallen}});
  });
}

void add_reward(CLI::App& app) {
  auto* rw = app.add_subcommand("reward", "Score motion against a directive");
  rw->require_subcommand(1);
  struct Opts {
    std::string skeleton, pose, directive, csv, config, discriminator;
  };
  auto o = std::make_shared<Opts>();
  auto* c = rw->add_subcommand("eval", "Per-frame reward breakdown of a clip (energy needs torques and is 0 here)");
  c->add_option("--skeleton", o->skeleton, "Skeleton file (default sim13)");
  c->add_option("--pose", o->pose, "Motion clip to score")->required();
  c->add_option("--directive", o->directive, "Directive file")->required();
  c->add_option("--csv", o->csv, "Output CSV")->required();
  c->add_option("--config", o->config, "JSON patch over the default reward config");
  c->add_option("--discriminator", o->discriminator, "Discriminator checkpoint for the style terms");
  c->callback([o] {
    const auto skel = skeleton_or_default(o->skeleton);
    const auto cfg = reward::tracking_config_from_json(merge_config(reward::to_json(reward::TrackingConfig{}), o->config));
    const auto clip = motion::load_clip(o->pose, skel);
    const auto d = directive::load_directive(o->directive, skel.joint_count());
    std::optional<adversary::DiscriminatorEnsemble> disc;
    if (!o->discriminator.empty()) disc = learn::load_discriminator(o->discriminator, skel);
    std::ofstream out(o->csv, std::ios::trunc);
    if (!out) throw Error("cannot write " + o->csv);
    out << "frame";
    for (const auto& col : reward::breakdown_columns()) out << "," << col;
    out << "\n";
    double sum = 0.0;
    for (int t = 0; t < clip.length(); ++t) {
      std::array<double, 5> parts{};
      if (disc) {
        std::vector<Pose> window;
        for (int k = adversary::kWindowLength - 1; k >= 0; --k) window.push_back(clip.frames[std::max(0, t - k)]);
        parts = adversary::style_reward(*disc, adversary::window_features(window)).first;
      }
      const auto b = reward::compose(reward::tracking_reward(clip.frames[t], d.at(t), d.mask, cfg), parts, 0.0, cfg);
      out << t;
      for (double v : reward::breakdown_values(b)) out << "," << fmt(v);
      out << "\n";
      sum += b.r_tr;
    }
    print_json({{"csv", o->csv}, {"frames", clip.length()}, {"mean_r_tr", clip.length() ? sum / clip.length() : 0.0}});
  });
}

void add_train(CLI::App& app) {
  struct Opts {
    std::string config, out;
    bool smoke = false, no_style = false, quiet = false;
    std::optional<int> iterations, threads;
    std::optional<std::uint64_t> seed;
  };
  auto o = std::make_shared<Opts>();
  auto* c = app.add_subcommand("train", "Train the controller with PPO and adversarial style rewards");
  c->add_option("--config", o->config, "Training config (JSON, merged over the defaults)");
  c->add_option("--out", o->out, "Output directory")->required();
  c->add_flag("--smoke", o->smoke, "Start from the small single-machine config");
  c->add_flag("--no-style-reward", o->no_style, "Ablation: style weight 0 (the discriminator still trains)");
  c->add_option("--iterations", o->iterations, "Override the iteration count")->check(CLI::NonNegativeNumber);
  c->add_option("--threads", o->threads, "Simulation threads")->check(CLI::PositiveNumber);
  c->add_option("--seed", o->seed, "Seed (overrides MHC_SEED and the config)");
  c->add_flag("--quiet", o->quiet, "No progress on stderr");
  c->callback([o] {
    const learn::TrainConfig base = o->smoke ? learn::smoke_config() : learn::TrainConfig{};
    auto cfg = learn::train_config_from_json(merge_config(learn::to_json(base), o->config));
    cfg.seed = resolve_seed(cfg.seed, o->seed);
    if (o->iterations) cfg.iterations = *o->iterations;
    if (o->threads) cfg.threads = *o->threads;
    if (o->no_style) cfg.reward.style_weight = 0.0;
    cfg.validate();
    const bool quiet = o->quiet;
    const auto all = learn::train(cfg, o->out, [quiet](const learn::IterationMetrics& m) {
      if (!quiet && (m.iteration % 10 == 0))
        std::cerr << "iteration " << m.iteration << " r_tr " << fmt(m.r_tr) << " r_st " << fmt(m.r_st) << " fallen "
                  << fmt(m.fallen_fraction) << std::endl;
    });
    nlohmann::json j{{"out", o->out}, {"iterations", all.size()}, {"seed", cfg.seed}};
    if (!all.empty()) {
      j["first_r_tr"] = all.front().r_tr;
      j["last_r_tr"] = all.back().r_tr;
    }
    print_json(j);
  });
}

void add_eval(CLI::App& app) {
  struct Opts {
    std::string protocol, checkpoint, generator, dataset, config, csv, skeleton;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads, episodes;
  };
  auto o = std::make_shared<Opts>();
  auto* c = app.add_subcommand("eval", "Score a controller on an evaluation protocol");
  c->add_option("protocol", o->protocol, "imitate, catchup, combine or complete")
      ->required()
      ->check(CLI::IsMember({"imitate", "catchup", "combine", "complete"}));
  auto* ck = c->add_option("--checkpoint", o->checkpoint, "Policy checkpoint");
  c->add_option("--generator", o->generator, "Baseline instead of a policy: hold or teleport")
      ->check(CLI::IsMember({"hold", "teleport"}))
      ->excludes(ck);
  c->add_option("--dataset", o->dataset, "Dataset directory (default: 4 synthetic clips)");
  c->add_option("--skeleton", o->skeleton, "Skeleton for synthetic data (default sim13)");
  c->add_option("--config", o->config, "Eval config (JSON, merged over the defaults)");
  c->add_option("--seed", o->seed, "Seed (overrides MHC_SEED and the config)");
  c->add_option("--threads", o->threads, "Worker threads")->check(CLI::PositiveNumber);
  c->add_option("--episodes", o->episodes, "Episodes per cell")->check(CLI::PositiveNumber);
  c->add_option("--csv", o->csv, "Output CSV")->required();
  c->callback([o] {
    if (o->checkpoint.empty() && o->generator.empty()) throw UsageError("eval needs --checkpoint or --generator");
    auto cfg = eval::eval_config_from_json(merge_config(eval::to_json(eval::EvalConfig{}), o->config));
    cfg.seed = resolve_seed(cfg.seed, o->seed);
    if (o->threads) cfg.threads = *o->threads;
    if (o->episodes) cfg.episodes_per_cell = *o->episodes;
    cfg.validate();
    const auto skel = skeleton_or_default(o->skeleton);
    const auto data = dataset_or_synthetic(o->dataset, skel, 4, 300);
    const sim::Simulator simulator(data.skeleton(), sim::SimConfig{});
    std::unique_ptr<eval::MotionGenerator> gen;
    learn::PolicyBundle bundle;
    if (!o->checkpoint.empty()) {
      bundle = learn::load_policy(o->checkpoint);
      if (bundle.joint_count() != data.skeleton().joint_count())
        throw SchemaError("policy expects " + std::to_string(bundle.joint_count()) + " joints, dataset has " +
                          std::to_string(data.skeleton().joint_count()));
      gen = std::make_unique<eval::PolicyGenerator>(bundle, simulator);
    } else if (o->generator == "hold") {
      gen = std::make_unique<eval::HoldGenerator>(simulator);
    } else {
      gen = std::make_unique<eval::TeleportGenerator>();
    }
    const auto p = eval::protocol_from_string(o->protocol);
    const auto report = eval::run_protocol(p, *gen, data, simulator, cfg);
    eval::write_eval_csv(report, o->csv);
    int errors = 0;
    for (const auto& r : report.rows) errors += r.error.empty() ? 0 : 1;
    print_json({{"protocol", report.protocol},
                {"csv", o->csv},
                {"episodes", report.rows.size()},
                {"budget", report.budget},
                {"mean_mpjpe_mm", report.mean_mpjpe_mm},
                {"success_rate", report.success_rate},
                {"errors", errors},
                {"seed", cfg.seed}});
  });
}

}  // namespace

void add_run_commands(CLI::App& app) {
  add_sim(app);
  add_reward(app);
  add_train(app);
  add_eval(app);
}

}  // namespace mhc::cli
