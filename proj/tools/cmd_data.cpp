#include "cli_common.hpp"

#include "mhc/dataset/augment.hpp"
#include "mhc/dataset/synthetic.hpp"
#include "mhc/motion/io.hpp"
#include "mhc/server/convert.hpp"

#include <memory>
#include <sstream>

namespace mhc::cli {

namespace {

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) out.push_back(name);
  return out;
}

nlohmann::json summary(const dataset::MotionDataset& ds) {
  return {{"skeleton", ds.skeleton().name()}, {"clips", ds.size()}, {"frames", ds.index().size()}};
}

void report(const directive::Directive& d, const std::string& out) {
  print_json({{"out", out}, {"mask", d.mask.describe()}, {"frames", d.length()}});
}

}  // namespace

void add_data_commands(CLI::App& app) {
  auto* ds = app.add_subcommand("dataset", "Create, check and augment motion datasets");
  ds->require_subcommand(1);

  {
    struct Opts {
      std::string out, skeleton;
      int clips = 4, frames = 300;
    };
    auto o = std::make_shared<Opts>();
    auto* c = ds->add_subcommand("synth", "Write a procedural dataset");
    c->add_option("--out", o->out, "Output directory")->required();
    c->add_option("--clips", o->clips, "Number of clips (1-6)")->check(CLI::Range(1, 6));
    c->add_option("--frames", o->frames, "Frames per clip")->check(CLI::PositiveNumber);
    c->add_option("--skeleton", o->skeleton, "Skeleton file (default sim13)");
    c->callback([o] {
      const auto data = dataset::synthetic_dataset(skeleton_or_default(o->skeleton), o->clips, o->frames);
      dataset::save_dataset(data, o->out);
      auto j = summary(data);
      j["out"] = o->out;
      print_json(j);
    });
  }
  {
    auto dir = std::make_shared<std::string>();
    auto* c = ds->add_subcommand("check", "Load and validate a dataset directory");
    c->add_option("dir", *dir, "Dataset directory")->required();
    c->callback([dir] { print_json(summary(dataset::load_dataset(*dir))); });
  }
  {
    struct Opts {
      std::string in, out;
      int combos = 8;
      std::optional<std::uint64_t> seed;
    };
    auto o = std::make_shared<Opts>();
    auto* c = ds->add_subcommand("augment", "Write M+ (the dataset plus upper/lower combinations)");
    c->add_option("--in", o->in, "Input dataset directory")->required();
    c->add_option("--out", o->out, "Output directory")->required();
    c->add_option("--combos", o->combos, "Number of combinations")->check(CLI::NonNegativeNumber);
    c->add_option("--seed", o->seed, "Seed (default 1)");
    c->callback([o] {
      const auto data = dataset::load_dataset(o->in);
      const auto mplus = dataset::build_mplus(data, dataset::AugmentSpec{}, o->combos, resolve_seed(1, o->seed));
      dataset::save_dataset(mplus, o->out);
      auto j = summary(mplus);
      j["out"] = o->out;
      print_json(j);
    });
  }

  auto* cv = app.add_subcommand("convert", "Turn keypoints, root commands or clips into directives");
  cv->require_subcommand(1);
  {
    struct Opts {
      std::string in, out, skeleton, occlude;
      int horizon = 10;
    };
    auto o = std::make_shared<Opts>();
    auto* c = cv->add_subcommand("keypoints", "mhc-keypoints/1 tracks to a G-channel directive");
    c->add_option("in", o->in, "Keypoint file")->required();
    c->add_option("--out", o->out, "Directive file")->required();
    c->add_option("--occlude", o->occlude, "Comma-separated joints to treat as occluded");
    c->add_option("--skeleton", o->skeleton, "Skeleton file (default sim13)");
    c->add_option("--horizon", o->horizon, "Lookahead frames")->check(CLI::PositiveNumber);
    c->callback([o] {
      const auto d = server::load_keypoints(o->in, skeleton_or_default(o->skeleton), split_names(o->occlude), o->horizon);
      directive::save_directive(d, o->out);
      report(d, o->out);
    });
  }
  {
    struct Opts {
      std::string in, out, skeleton;
      int horizon = 10;
      double fps = 30.0;
    };
    auto o = std::make_shared<Opts>();
    auto* c = cv->add_subcommand("commands", "Root-command CSV (speed, heading, height[, facing]) to a joystick directive");
    c->add_option("in", o->in, "CSV file")->required();
    c->add_option("--out", o->out, "Directive file")->required();
    c->add_option("--skeleton", o->skeleton, "Skeleton file (default sim13)");
    c->add_option("--horizon", o->horizon, "Lookahead frames")->check(CLI::PositiveNumber);
    c->add_option("--fps", o->fps, "Frame rate")->check(CLI::PositiveNumber);
    c->callback([o] {
      const auto d = server::load_root_commands(o->in, skeleton_or_default(o->skeleton).joint_count(), o->horizon, o->fps);
      directive::save_directive(d, o->out);
      report(d, o->out);
    });
  }
  {
    struct Opts {
      std::string in, out, skeleton;
      int horizon = 10;
    };
    auto o = std::make_shared<Opts>();
    auto* c = cv->add_subcommand("clip", "Motion clip to a full-pose R+THETA+L directive");
    c->add_option("in", o->in, "mhc-clip/1 file")->required();
    c->add_option("--out", o->out, "Directive file")->required();
    c->add_option("--skeleton", o->skeleton, "Skeleton file (default sim13)");
    c->add_option("--horizon", o->horizon, "Lookahead frames")->check(CLI::PositiveNumber);
    c->callback([o] {
      const auto d = server::clip_to_directive(motion::load_clip(o->in, skeleton_or_default(o->skeleton)), o->horizon);
      directive::save_directive(d, o->out);
      report(d, o->out);
    });
  }
}

}  // namespace mhc::cli
