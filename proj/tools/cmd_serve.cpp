#include "cli_common.hpp"

#include "mhc/learn/trainer.hpp"
#include "mhc/motion/io.hpp"
#include "mhc/server/session.hpp"

#include <memory>

namespace mhc::cli {

using motion::Pose;

void add_serve_command(CLI::App& app) {
  struct Opts {
    std::string checkpoint, discriminator, skeleton, initial;
    server::ServeConfig cfg;
    bool no_realtime = false;
  };
  auto o = std::make_shared<Opts>();
  auto* c = app.add_subcommand("serve", "Live steering session over mhc-wire/1 (one client)");
  c->add_option("--checkpoint", o->checkpoint, "Policy checkpoint")->required();
  c->add_option("--discriminator", o->discriminator, "Discriminator checkpoint for streamed style terms");
  c->add_option("--skeleton", o->skeleton, "Skeleton file (default sim13)");
  c->add_option("--initial", o->initial, "Clip whose first frame is the start pose (default: standing)");
  c->add_option("--port", o->cfg.port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  c->add_option("--bind", o->cfg.bind, "Bind address");
  c->add_flag("--no-realtime", o->no_realtime, "Step as fast as possible instead of 30 Hz");
  c->add_option("--max-frames", o->cfg.max_frames, "Stop after this many frames (0: until the client leaves)")
      ->check(CLI::NonNegativeNumber);
  c->callback([o] {
    const auto skel = skeleton_or_default(o->skeleton);
    const auto bundle = learn::load_policy(o->checkpoint);
    if (bundle.joint_count() != skel.joint_count())
      throw SchemaError("policy expects " + std::to_string(bundle.joint_count()) + " joints, skeleton has " +
                        std::to_string(skel.joint_count()));
    std::optional<adversary::DiscriminatorEnsemble> disc;
    if (!o->discriminator.empty()) disc = learn::load_discriminator(o->discriminator, skel);
    const sim::Simulator simulator(skel, sim::SimConfig{});
    const Pose initial = o->initial.empty() ? standing_pose(skel) : motion::load_clip(o->initial, skel).frames.at(0);
    o->cfg.realtime = !o->no_realtime;
    server::SessionServer srv(o->cfg);
    print_json({{"listening", srv.port()}, {"bind", o->cfg.bind}, {"protocol", server::kWireProtocol}});
    const auto r = srv.run(bundle, simulator, initial, disc ? &*disc : nullptr);
    nlohmann::json j{{"frames", r.frames}, {"end", r.end}};
    if (!r.error.empty()) j["client_error"] = r.error;
    print_json(j);
  });
}

}  // namespace mhc::cli
