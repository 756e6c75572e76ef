#include "mhc/learn/trainer.hpp"

#include "mhc/dataset/synthetic.hpp"
#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"
#include "mhc/motion/io.hpp"
#include "mhc/util/seed.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace mhc::learn {

namespace {

enum SeedStream : std::uint64_t { kAugment = 1, kFallBank, kPolicy, kDisc, kMain, kEnvBase = 1000 };

template <typename E>
[[noreturn]] void rethrow_with(const E& e, const std::string& where) {
  throw E(where + ": " + e.what());
}

nlohmann::json episode_to_json(const directive::EpisodeSpec& s) {
  return {{"length", s.length},   {"min_segment", s.min_segment},         {"max_segment", s.max_segment},
          {"channel_menu", s.channel_menu}, {"joint_mask_prob", s.joint_mask_prob}, {"horizon", s.horizon}};
}

directive::EpisodeSpec episode_from_json(const nlohmann::json& j) {
  directive::EpisodeSpec s;
  s.length = j.value("length", s.length);
  s.min_segment = j.value("min_segment", s.min_segment);
  s.max_segment = j.value("max_segment", s.max_segment);
  s.channel_menu = j.value("channel_menu", s.channel_menu);
  s.joint_mask_prob = j.value("joint_mask_prob", s.joint_mask_prob);
  s.horizon = j.value("horizon", s.horizon);
  try {
    s.validate();
  } catch (const InvalidDirective& e) {
    throw SchemaError(std::string("episode: ") + e.what());
  }
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 0) throw SchemaError("iterations must be >= 0");
  if (threads < 1) throw SchemaError("threads must be >= 1");
  if (checkpoint_every < 0) throw SchemaError("checkpoint_every must be >= 0");
  if (dataset_dir.empty() && (synthetic_clips < 1 || synthetic_clips > 6))
    throw SchemaError("synthetic_clips must be in [1, 6]");
  if (synthetic_frames < episode.min_segment) throw SchemaError("synthetic_frames shorter than a segment");
  if (combinations < 0) throw SchemaError("combinations must be >= 0");
  if (!(p_fall >= 0.0 && p_fall <= 1.0)) throw SchemaError("p_fall must be in [0,1]");
  if (fall_bank_size < 0 || (p_fall > 0.0 && fall_bank_size == 0))
    throw SchemaError("a positive p_fall needs a nonempty fall bank");
  episode.validate();
  policy.validate();
  ppo.validate();
  try {
    sim.validate();
    reward.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"seed", c.seed},
          {"iterations", c.iterations},
          {"threads", c.threads},
          {"checkpoint_every", c.checkpoint_every},
          {"dataset", {{"dir", c.dataset_dir}, {"synthetic_clips", c.synthetic_clips}, {"frames", c.synthetic_frames}}},
          {"augment", {{"combinations", c.combinations}}},
          {"initial", {{"p_fall", c.p_fall}, {"fall_bank", c.fall_bank_size}}},
          {"episode", episode_to_json(c.episode)},
          {"sim", sim::to_json(c.sim)},
          {"reward", reward::to_json(c.reward)},
          {"policy", to_json(c.policy)},
          {"ppo", to_json(c.ppo)},
          {"discriminator", adversary::to_json(c.discriminator)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.iterations = j.value("iterations", c.iterations);
    c.threads = j.value("threads", c.threads);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      c.dataset_dir = d.value("dir", c.dataset_dir);
      c.synthetic_clips = d.value("synthetic_clips", c.synthetic_clips);
      c.synthetic_frames = d.value("frames", c.synthetic_frames);
    }
    if (j.contains("augment")) c.combinations = j["augment"].value("combinations", c.combinations);
    if (j.contains("initial")) {
      c.p_fall = j["initial"].value("p_fall", c.p_fall);
      c.fall_bank_size = j["initial"].value("fall_bank", c.fall_bank_size);
    }
    if (j.contains("episode")) c.episode = episode_from_json(j["episode"]);
    if (j.contains("sim")) {
      nlohmann::json merged = sim::to_json(c.sim);
      merged.update(j["sim"]);
      c.sim = sim::sim_config_from_json(merged);
    }
    if (j.contains("reward")) c.reward = reward::tracking_config_from_json(j["reward"]);
    if (j.contains("policy")) c.policy = policy_config_from_json(j["policy"]);
    if (j.contains("ppo")) c.ppo = ppo_config_from_json(j["ppo"]);
    if (j.contains("discriminator")) c.discriminator = adversary::discriminator_config_from_json(j["discriminator"]);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("train config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig smoke_config() {
  TrainConfig c;
  c.seed = 7;
  c.iterations = 200;
  c.checkpoint_every = 0;
  c.synthetic_clips = 4;
  c.combinations = 4;
  c.fall_bank_size = 16;
  c.policy.encoder = {64, 32};
  c.policy.head = {64, 64};
  c.policy.value = {64, 64};
  c.ppo.num_envs = 16;
  c.ppo.horizon = 64;
  c.ppo.epochs = 4;
  c.ppo.minibatches = 4;
  c.discriminator.hidden = {64, 32};
  c.discriminator.batch_size = 64;
  c.discriminator.updates_per_iteration = 2;
  c.discriminator.replay_capacity = 20000;
  return c;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "iteration", "steps",      "r_h",       "r_o",         "r_v",       "r_l",          "r_tr",
      "r_st",      "energy",     "total",     "fallen_frac", "episodes",  "policy_loss",  "value_loss",
      "entropy",   "approx_kl",  "clip_frac", "disc_loss",   "disc_bce",  "disc_penalty", "disc_real",
      "disc_fake"};
  return cols;
}

std::string metrics_row(const IterationMetrics& m) {
  std::string s = std::to_string(m.iteration) + "," + std::to_string(m.steps);
  for (double v : {m.r_h, m.r_o, m.r_v, m.r_l, m.r_tr, m.r_st, m.energy, m.total, m.fallen_fraction})
    s += "," + fmt(v);
  s += "," + std::to_string(m.episodes_finished);
  for (double v : {m.ppo.policy_loss, m.ppo.value_loss, m.ppo.entropy, m.ppo.approx_kl, m.ppo.clip_fraction,
                   m.disc.loss, m.disc.bce, m.disc.penalty, m.disc.mean_real, m.disc.mean_fake})
    s += "," + fmt(v);
  return s;
}

dataset::MotionDataset load_training_data(const TrainConfig& cfg) {
  if (!cfg.dataset_dir.empty()) return dataset::load_dataset(cfg.dataset_dir);
  return dataset::synthetic_dataset(motion::sim13(), cfg.synthetic_clips, cfg.synthetic_frames);
}

Trainer::Trainer(TrainConfig cfg, dataset::MotionDataset data)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      sim_(data_.skeleton(), cfg_.sim),
      bundle_(data_.skeleton().joint_count(), cfg_.policy, derive_seed(cfg_.seed, kPolicy)),
      opt_(bundle_, cfg_.ppo),
      disc_(data_.skeleton(), cfg_.discriminator, derive_seed(cfg_.seed, kDisc)),
      disc_opt_(disc_.trunk().param_count(), cfg_.discriminator.adam),
      replay_(disc_.window_dim(), cfg_.discriminator.replay_capacity),
      rng_(derive_seed(cfg_.seed, kMain)) {
  cfg_.validate();
  if (data_.empty()) throw DatasetTooSmall("training needs at least one clip");
  dataset::AugmentSpec aug;
  aug.combo_length = std::min(aug.combo_length, [&] {
    int m = data_.clips().front().length();
    for (const auto& c : data_.clips()) m = std::min(m, c.length());
    return m;
  }());
  mplus_ = dataset::build_mplus(data_, aug, cfg_.combinations, derive_seed(cfg_.seed, kAugment));
  if (cfg_.fall_bank_size > 0)
    fall_bank_ = dataset::generate_fall_bank(mplus_, sim_, cfg_.fall_bank_size, derive_seed(cfg_.seed, kFallBank));
  envs_.resize(cfg_.ppo.num_envs);
  for (int e = 0; e < cfg_.ppo.num_envs; ++e) {
    envs_[e].rng.seed(derive_seed(cfg_.seed, kEnvBase + e));
    reset_env(envs_[e]);
  }
}

void Trainer::reset_env(Env& env) {
  auto init = dataset::sample_initial_pose(mplus_, fall_bank_, cfg_.p_fall, env.rng);
  const Vec3 shift(-init.pose.root.position.x(), -init.pose.root.position.y(), 0.0);
  const Pose start = motion::translate_pose(init.pose, shift);
  env.state = sim_.reset(start);
  env.episode = directive::build_episode_directive(mplus_, cfg_.episode, env.rng, Vec2::Zero());
  env.t = 0;
  env.history.assign(adversary::kWindowLength, env.state.pose);
}

VecX Trainer::window_of(const Env& env) const {
  return adversary::window_features(std::vector<Pose>(env.history.begin(), env.history.end()));
}

IterationMetrics Trainer::iterate() {
  const int E = cfg_.ppo.num_envs, H = cfg_.ppo.horizon;
  auto& pol = bundle_.policy;
  const int A = pol.action_dim();
  RolloutBuffer buf(E, H, pol.obs_dim(), A);
  MatX raw_obs(pol.obs_dim(), E * H);
  IterationMetrics m;
  m.iteration = iteration_;
  step_log_.clear();
  const std::string where = "iteration " + std::to_string(iteration_);

  std::vector<std::pair<sim::SimState, sim::StepInfo>> results(E);
  MatX windows(disc_.window_dim(), E);
  for (int t = 0; t < H; ++t) {
    MatX obs_raw(pol.obs_dim(), E);
    for (int e = 0; e < E; ++e)
      obs_raw.col(e) = directive::encode_observation(envs_[e].state.pose, envs_[e].episode.directive, envs_[e].t);
    const MatX obs = bundle_.normalizer.normalize(obs_raw);
    const MatX mu = pol.mean(obs);
    const MatX val = bundle_.value.forward(obs);
    MatX act(A, E);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int e = 0; e < E; ++e)
      for (int i = 0; i < A; ++i) act(i, e) = mu(i, e) + std::exp(pol.log_std()[i]) * normal(envs_[e].rng);
    const VecX logp = gaussian_log_prob(mu, pol.log_std(), act);

    auto step_env = [&](int e) { results[e] = sim_.step(envs_[e].state, action_from_vector(act.col(e))); };
    try {
      if (cfg_.threads > 1 && E > 1) {
        std::vector<std::thread> pool;
        const int T = std::min(cfg_.threads, E);
        for (int w = 0; w < T; ++w)
          pool.emplace_back([&, w] {
            for (int e = w; e < E; e += T) step_env(e);
          });
        for (auto& th : pool) th.join();
      } else {
        for (int e = 0; e < E; ++e) step_env(e);
      }
    } catch (const NumericalDivergence& err) {
      rethrow_with(err, where);
    }

    for (int e = 0; e < E; ++e) {
      envs_[e].history.pop_front();
      envs_[e].history.push_back(results[e].first.pose);
      windows.col(e) = window_of(envs_[e]);
    }
    const MatX style = disc_.style_parts(windows);

    for (int e = 0; e < E; ++e) {
      Env& env = envs_[e];
      const auto& [next, info] = results[e];
      const auto& dir = env.episode.directive;
      const Pose& target = dir.at(env.t + 1);
      const auto tr = reward::tracking_reward(next.pose, target, dir.mask, cfg_.reward);
      const double energy = reward::energy_cost(info.action, info.prev_action, info.mean_torque, cfg_.reward);
      std::array<double, 5> parts{};
      for (int k = 0; k < 5; ++k) parts[k] = style(k, e);
      const auto rb = reward::compose(tr, parts, energy, cfg_.reward);
      if (log_steps_)
        step_log_.push_back({next.pose, target, dir.mask, info.action, info.prev_action, info.mean_torque, parts, rb.total});

      const int k = buf.index(e, t);
      raw_obs.col(k) = obs_raw.col(e);
      buf.obs.col(k) = obs.col(e);
      buf.actions.col(k) = act.col(e);
      buf.log_probs[k] = logp[e];
      buf.values[k] = val(0, e);
      buf.rewards[k] = rb.total;
      replay_.push(windows.col(e));

      m.r_h += rb.r_h;
      m.r_o += rb.r_o;
      m.r_v += rb.r_v;
      m.r_l += rb.r_l;
      m.r_tr += rb.r_tr;
      m.r_st += rb.r_st;
      m.energy += rb.energy;
      m.total += rb.total;
      m.fallen_fraction += next.fallen ? 1.0 : 0.0;

      env.state = next;
      env.t += 1;
      if (env.t >= dir.length()) {
        buf.dones[k] = true;
        const VecX last = directive::encode_observation(env.state.pose, dir, env.t);
        buf.truncation_values[k] = bundle_.value.forward(bundle_.normalizer.normalize(last))(0, 0);
        ++m.episodes_finished;
        reset_env(env);
      }
    }
  }
  {
    MatX obs_raw(pol.obs_dim(), E);
    for (int e = 0; e < E; ++e)
      obs_raw.col(e) = directive::encode_observation(envs_[e].state.pose, envs_[e].episode.directive, envs_[e].t);
    buf.last_values = bundle_.value.forward(bundle_.normalizer.normalize(obs_raw)).row(0).transpose();
  }

  const double n = static_cast<double>(E * H);
  m.steps = static_cast<long>(E) * H * (iteration_ + 1);
  for (double* v : {&m.r_h, &m.r_o, &m.r_v, &m.r_l, &m.r_tr, &m.r_st, &m.energy, &m.total, &m.fallen_fraction})
    *v /= n;

  try {
    const int B = cfg_.discriminator.batch_size;
    for (int u = 0; u < cfg_.discriminator.updates_per_iteration; ++u) {
      const MatX real = adversary::sample_real_windows(data_, B, rng_);
      const MatX fake = replay_.sample(B, rng_);
      m.disc = adversary::update_discriminators(disc_, real, fake, disc_opt_);
    }
    m.ppo = ppo_update(bundle_, buf, cfg_.ppo, opt_, rng_);
  } catch (const NonFiniteLoss& err) {
    rethrow_with(err, where);
  }
  bundle_.normalizer.update(raw_obs);
  ++iteration_;
  bundle_.iteration = iteration_;
  return m;
}

void save_discriminator(const adversary::DiscriminatorEnsemble& d, int joint_count, const std::filesystem::path& path) {
  TensorFile f;
  f.meta = {{"kind", "mhc-discriminator"},
            {"version", 1},
            {"joint_count", joint_count},
            {"config", adversary::to_json(d.config())}};
  f.tensors["trunk"] = d.trunk().params();
  write_tensor_file(f, path);
}

adversary::DiscriminatorEnsemble load_discriminator(const std::filesystem::path& path, const motion::SkeletonSpec& skel) {
  const TensorFile f = read_tensor_file(path);
  try {
    if (f.meta.at("kind") != "mhc-discriminator") throw SchemaError(path.string() + ": not a discriminator checkpoint");
    if (f.meta.at("joint_count").get<int>() != skel.joint_count())
      throw SchemaError(path.string() + ": joint count does not match the skeleton");
    adversary::DiscriminatorEnsemble d(skel, adversary::discriminator_config_from_json(f.meta.at("config")), 0);
    if (f.at("trunk").size() != d.trunk().param_count()) throw SchemaError(path.string() + ": wrong trunk size");
    d.trunk().params() = f.at("trunk");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::vector<IterationMetrics> train(const TrainConfig& cfg, const std::filesystem::path& out,
                                    const std::function<void(const IterationMetrics&)>& progress) {
  std::filesystem::create_directories(out);
  motion::write_json_file(to_json(cfg), out / "resolved-config.json");
  Trainer trainer(cfg, load_training_data(cfg));
  const int J = trainer.mplus().skeleton().joint_count();
  std::ofstream csv(out / "metrics.csv", std::ios::trunc);
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << "\n";
  std::vector<IterationMetrics> all;
  for (int it = 0; it < cfg.iterations; ++it) {
    all.push_back(trainer.iterate());
    csv << metrics_row(all.back()) << "\n";
    csv.flush();
    if (progress) progress(all.back());
    if (cfg.checkpoint_every > 0 && trainer.iteration() % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "iter_%06d", trainer.iteration());
      std::filesystem::create_directories(out / "checkpoints");
      save_policy(trainer.bundle(), out / "checkpoints" / (std::string(name) + ".policy.ckpt"));
      save_discriminator(trainer.discriminator(), J, out / "checkpoints" / (std::string(name) + ".disc.ckpt"));
    }
  }
  save_policy(trainer.bundle(), out / "policy.ckpt");
  save_discriminator(trainer.discriminator(), J, out / "discriminator.ckpt");
  return all;
}

}  // namespace mhc::learn
