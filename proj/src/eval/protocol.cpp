#include "mhc/eval/protocol.hpp"

#include "mhc/dataset/augment.hpp"
#include "mhc/directive/episode.hpp"
#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"
#include "mhc/util/seed.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace mhc::eval {

using directive::Channel;

std::vector<Pose> PolicyGenerator::generate(const Pose& initial, const Directive& d) const {
  std::vector<Pose> out;
  out.reserve(d.length());
  sim::SimState s = sim_.reset(initial);
  out.push_back(s.pose);
  for (int t = 0; t + 1 < d.length(); ++t) {
    s = sim_.step(s, bundle_.act(s.pose, d, t)).first;
    out.push_back(s.pose);
  }
  return out;
}

std::vector<Pose> HoldGenerator::generate(const Pose& initial, const Directive& d) const {
  std::vector<Pose> out;
  out.reserve(d.length());
  sim::SimState s = sim_.reset(initial);
  const sim::Action hold = sim_.hold_action(s);
  out.push_back(s.pose);
  for (int t = 0; t + 1 < d.length(); ++t) {
    s = sim_.step(s, hold).first;
    out.push_back(s.pose);
  }
  return out;
}

std::vector<Pose> TeleportGenerator::generate(const Pose&, const Directive& d) const { return d.frames; }

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::kImitate: return "imitate";
    case Protocol::kCatchup: return "catchup";
    case Protocol::kCombine: return "combine";
    case Protocol::kComplete: return "complete";
  }
  return "?";
}

Protocol protocol_from_string(const std::string& s) {
  for (Protocol p : {Protocol::kImitate, Protocol::kCatchup, Protocol::kCombine, Protocol::kComplete})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown protocol '" + s + "' (imitate, catchup, combine, complete)");
}

double protocol_budget(Protocol p) { return p == Protocol::kCatchup ? kCatchupBudget : kDefaultBudget; }

void EvalConfig::validate() const {
  if (episodes_per_cell < 1) throw std::invalid_argument("episodes_per_cell must be >= 1");
  if (episode_length < 2) throw std::invalid_argument("episode_length must be >= 2");
  if (!(p_fall >= 0.0 && p_fall <= 1.0)) throw std::invalid_argument("p_fall outside [0,1]");
  if (p_fall > 0.0 && fall_bank_size < 1) throw std::invalid_argument("p_fall > 0 needs a fall bank");
  if (combinations < 0) throw std::invalid_argument("combinations must be >= 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  for (int m : menu)
    if (m < 0 || m >= directive::kChannelMenuSize) throw std::invalid_argument("menu index out of range");
  for (double p : joint_mask_percentages)
    if (!(p >= 0.0 && p < 100.0)) throw std::invalid_argument("joint mask percentage outside [0,100)");
}

nlohmann::json to_json(const EvalConfig& c) {
  return {{"seed", c.seed},
          {"episodes_per_cell", c.episodes_per_cell},
          {"episode_length", c.episode_length},
          {"combinations", c.combinations},
          {"p_fall", c.p_fall},
          {"fall_bank_size", c.fall_bank_size},
          {"menu", c.menu},
          {"joint_mask_percentages", c.joint_mask_percentages},
          {"threads", c.threads},
          {"horizon", c.horizon}};
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
  EvalConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.episodes_per_cell = j.value("episodes_per_cell", c.episodes_per_cell);
    c.episode_length = j.value("episode_length", c.episode_length);
    c.combinations = j.value("combinations", c.combinations);
    c.p_fall = j.value("p_fall", c.p_fall);
    c.fall_bank_size = j.value("fall_bank_size", c.fall_bank_size);
    c.menu = j.value("menu", c.menu);
    c.joint_mask_percentages = j.value("joint_mask_percentages", c.joint_mask_percentages);
    c.threads = j.value("threads", c.threads);
    c.horizon = j.value("horizon", c.horizon);
    c.validate();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("eval config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("eval config: ") + e.what());
  }
  return c;
}

namespace {

DirectiveMask full_mask(int joints) {
  DirectiveMask m;
  m.channels = {true, true, true, true};
  m.joint_mask.assign(joints, true);
  return m;
}

/// Reference frames scored on the driving mask's position joints, or on
/// every joint when the driving mask selects no joint position.
Directive scoring_directive(const std::vector<Pose>& frames, const DirectiveMask& driving, int horizon) {
  Directive d;
  d.frames = frames;
  d.horizon = horizon;
  d.mask.channels[static_cast<int>(Channel::kLocal)] = true;
  const int J = static_cast<int>(driving.joint_mask.size());
  d.mask.joint_mask.assign(J, false);
  for (int c = 0; c < J; ++c) d.mask.joint_mask[c] = driving.joint_selected(c);
  if (driving.selected_joint_count() == 0) d.mask.joint_mask.assign(J, true);
  return d;
}

EvalEpisode make_episode(std::string clip, const Pose& initial, std::vector<Pose> frames, const DirectiveMask& mask,
                         int horizon) {
  EvalEpisode e;
  e.clip = std::move(clip);
  e.initial = initial;
  e.scoring = scoring_directive(frames, mask, horizon);
  e.driving.frames = std::move(frames);
  e.driving.mask = mask;
  e.driving.horizon = horizon;
  return e;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

struct ClipWindow {
  int clip = 0;
  int start = 0;
  int length = 0;
};

ClipWindow draw_window(const dataset::MotionDataset& data, int length, std::mt19937_64& rng) {
  ClipWindow w;
  w.clip = uniform_int(rng, 0, data.size() - 1);
  const int n = data.clips()[w.clip].length();
  w.length = std::min(length, n);
  w.start = uniform_int(rng, 0, n - w.length);
  return w;
}

std::vector<Pose> window_frames(const dataset::MotionDataset& data, const ClipWindow& w) {
  const auto& f = data.clips()[w.clip].frames;
  return {f.begin() + w.start, f.begin() + w.start + w.length};
}

std::vector<EvalEpisode> imitation_cell(const dataset::MotionDataset& data, const EvalConfig& cfg,
                                        std::mt19937_64& rng, const std::function<DirectiveMask()>& mask) {
  std::vector<EvalEpisode> out;
  for (int i = 0; i < cfg.episodes_per_cell; ++i) {
    const ClipWindow w = draw_window(data, cfg.episode_length, rng);
    auto frames = window_frames(data, w);
    const Pose initial = frames.front();
    out.push_back(make_episode(data.clips()[w.clip].name, initial, std::move(frames), mask(), cfg.horizon));
  }
  return out;
}

}  // namespace

std::vector<EvalEpisode> protocol_episodes(Protocol p, const dataset::MotionDataset& data, const sim::Simulator& sim,
                                           const EvalConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw DatasetTooSmall("evaluation needs at least one clip");
  const int J = data.skeleton().joint_count();
  std::mt19937_64 rng(derive_seed(cfg.seed, 10 + static_cast<int>(p)));
  std::vector<EvalEpisode> out;

  switch (p) {
    case Protocol::kImitate:
      return imitation_cell(data, cfg, rng, [&] { return full_mask(J); });

    case Protocol::kComplete: {
      for (int m : cfg.menu) {
        auto cell = imitation_cell(data, cfg, rng, [&] { return directive::channel_mask_from_menu(m, J); });
        out.insert(out.end(), cell.begin(), cell.end());
      }
      for (double pct : cfg.joint_mask_percentages) {
        auto cell = imitation_cell(data, cfg, rng, [&] {
          const DirectiveMask g = directive::channel_mask_from_menu(3, J);
          return directive::compose_joint_mask(g, directive::joint_mask_for_percentage(pct, J, rng));
        });
        out.insert(out.end(), cell.begin(), cell.end());
      }
      return out;
    }

    case Protocol::kCombine: {
      const auto upper = dataset::AugmentSpec{}.resolve_upper(data.skeleton());
      for (int i = 0; i < cfg.episodes_per_cell; ++i) {
        const int lower = uniform_int(rng, 0, data.size() - 1);
        int up = uniform_int(rng, 0, data.size() - 1);
        if (data.size() > 1 && up == lower) up = (up + 1) % data.size();
        const auto& lc = data.clips()[lower];
        const auto& uc = data.clips()[up];
        const int len = std::min({cfg.episode_length, lc.length(), uc.length()});
        const int ls = uniform_int(rng, 0, lc.length() - len);
        const int us = uniform_int(rng, 0, uc.length() - len);
        auto clip = dataset::combine_upper_lower(data.skeleton(), lc, uc, len, upper, ls, us);
        const Pose initial = clip.frames.front();
        out.push_back(make_episode(uc.name + "/" + lc.name, initial, std::move(clip.frames), full_mask(J),
                                   cfg.horizon));
      }
      return out;
    }

    case Protocol::kCatchup: {
      dataset::AugmentSpec aug;
      for (const auto& c : data.clips()) aug.combo_length = std::min(aug.combo_length, c.length());
      const auto mplus = dataset::build_mplus(data, aug, cfg.combinations, derive_seed(cfg.seed, 1));
      std::vector<Pose> bank;
      if (cfg.p_fall > 0.0) bank = dataset::generate_fall_bank(mplus, sim, cfg.fall_bank_size, derive_seed(cfg.seed, 2));
      std::uniform_real_distribution<double> yaw(0.0, 2.0 * std::numbers::pi);
      for (int i = 0; i < cfg.episodes_per_cell; ++i) {
        const auto init = dataset::sample_initial_pose(mplus, bank, cfg.p_fall, rng);
        const Pose initial = motion::translate_pose(
            init.pose, Vec3(-init.pose.root.position.x(), -init.pose.root.position.y(), 0.0));
        const int first = uniform_int(rng, cfg.episode_length / 4, cfg.episode_length - cfg.episode_length / 4);
        std::vector<directive::Segment> segs;
        std::string name;
        for (int len : {first, cfg.episode_length - first}) {
          directive::Segment s;
          s.clip = uniform_int(rng, 0, mplus.size() - 1);
          const int n = mplus.clips()[s.clip].length();
          s.length = std::min(len, n);
          s.start = uniform_int(rng, 0, n - s.length);
          s.yaw = yaw(rng);
          name += (name.empty() ? "" : "+") + mplus.clips()[s.clip].name;
          segs.push_back(s);
        }
        int total = 0;
        for (const auto& s : segs) total += s.length;
        auto frames = directive::assemble_frames(mplus, segs, total, Vec2::Zero());
        out.push_back(make_episode(name, initial, std::move(frames), full_mask(J), cfg.horizon));
      }
      return out;
    }
  }
  return out;
}

void aggregate(EvalReport& r) {
  double sum = 0.0;
  int scored = 0, ok = 0;
  for (const auto& row : r.rows) {
    if (row.error.empty()) {
      sum += row.mpjpe_mm;
      ++scored;
    }
    if (row.success) ++ok;
  }
  r.mean_mpjpe_mm = scored > 0 ? sum / scored : 0.0;
  r.success_rate = r.rows.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(r.rows.size());
}

EvalReport run_episodes(Protocol p, const std::vector<EvalEpisode>& episodes, const MotionGenerator& gen,
                        int threads) {
  EvalReport report;
  report.protocol = to_string(p);
  report.budget = protocol_budget(p);
  report.rows.resize(episodes.size());
  auto run_one = [&](std::size_t i) {
    const EvalEpisode& ep = episodes[i];
    EvalRow& row = report.rows[i];
    row.protocol = report.protocol;
    row.episode = static_cast<int>(i);
    row.clip = ep.clip;
    row.mask = ep.driving.mask.describe();
    try {
      const auto motion = gen.generate(ep.initial, ep.driving);
      row.mpjpe_mm = mpjpe(motion, ep.scoring);
      row.failed_frame_fraction = failed_frame_fraction(motion, ep.scoring);
      row.success = row.failed_frame_fraction < report.budget;
    } catch (const std::exception& e) {
      row.mpjpe_mm = 0.0;
      row.failed_frame_fraction = 1.0;
      row.success = false;
      row.error = e.what();
    }
  };
  const int T = std::max(1, std::min<int>(threads, static_cast<int>(episodes.size())));
  if (T == 1) {
    for (std::size_t i = 0; i < episodes.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < T; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < episodes.size(); i += T) run_one(i);
      });
    for (auto& t : pool) t.join();
  }
  aggregate(report);
  return report;
}

EvalReport run_protocol(Protocol p, const MotionGenerator& gen, const dataset::MotionDataset& data,
                        const sim::Simulator& sim, const EvalConfig& cfg) {
  return run_episodes(p, protocol_episodes(p, data, sim, cfg), gen, cfg.threads);
}

const std::vector<std::string>& eval_columns() {
  static const std::vector<std::string> cols{"protocol", "episode", "clip", "mask", "mpjpe_mm",
                                             "failed_frame_fraction", "success", "error"};
  return cols;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string eval_csv(const EvalReport& r) {
  std::string out;
  const auto& cols = eval_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& row : r.rows) {
    out += csv_field(row.protocol) + ',' + std::to_string(row.episode) + ',' + csv_field(row.clip) + ',' +
           csv_field(row.mask) + ',' + num(row.mpjpe_mm) + ',' + num(row.failed_frame_fraction) + ',' +
           (row.success ? "1" : "0") + ',' + csv_field(row.error) + '\n';
  }
  return out;
}

void write_eval_csv(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << eval_csv(r);
}

}  // namespace mhc::eval
