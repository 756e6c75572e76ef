#include "mhc/adversary/discriminator.hpp"

#include "mhc/directive/observation.hpp"
#include "mhc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mhc::adversary {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

VecX frame_features(const Pose& pose) { return directive::encode_pose(pose); }

VecX window_features(const std::vector<Pose>& frames) {
  if (static_cast<int>(frames.size()) != kWindowLength) throw ShapeMismatch("style windows hold exactly 10 frames");
  const FeatureLayout layout{frames.front().joint_count()};
  VecX out(layout.window_dim());
  for (int i = 0; i < kWindowLength; ++i) out.segment(i * layout.frame_dim(), layout.frame_dim()) = frame_features(frames[i]);
  return out;
}

VecX part_feature_mask(const SkeletonSpec& skel, BodyPart part) {
  const int J = skel.joint_count();
  const FeatureLayout layout{J};
  VecX frame = VecX::Zero(layout.frame_dim());
  if (part == BodyPart::kRoot || part == BodyPart::kFullBody) frame.head(FeatureLayout::kRootDim).setOnes();
  for (int c : skel.part_channels(part)) {
    frame.segment(FeatureLayout::kRootDim + 6 * c, 6).setOnes();
    frame.segment(FeatureLayout::kRootDim + 6 * J + 3 * c, 3).setOnes();
  }
  return frame.replicate(kWindowLength, 1);
}

nlohmann::json to_json(const DiscriminatorConfig& c) {
  return {{"hidden", c.hidden},
          {"gp_weight", c.gp_weight},
          {"clamp_eps", c.clamp_eps},
          {"lr", c.adam.lr},
          {"max_grad_norm", c.adam.max_grad_norm},
          {"batch_size", c.batch_size},
          {"updates_per_iteration", c.updates_per_iteration},
          {"replay_capacity", c.replay_capacity}};
}

DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j) {
  DiscriminatorConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.gp_weight = j.value("gp_weight", c.gp_weight);
  c.clamp_eps = j.value("clamp_eps", c.clamp_eps);
  c.adam.lr = j.value("lr", c.adam.lr);
  c.adam.max_grad_norm = j.value("max_grad_norm", c.adam.max_grad_norm);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.updates_per_iteration = j.value("updates_per_iteration", c.updates_per_iteration);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  if (!(c.clamp_eps > 0.0 && c.clamp_eps < 0.5)) throw SchemaError("discriminator clamp_eps must be in (0, 0.5)");
  if (c.gp_weight < 0.0 || c.batch_size <= 0 || c.replay_capacity <= 0 || c.updates_per_iteration < 0)
    throw SchemaError("invalid discriminator config");
  return c;
}

DiscriminatorEnsemble::DiscriminatorEnsemble(const SkeletonSpec& skel, const DiscriminatorConfig& cfg,
                                             std::uint64_t seed)
    : cfg_(cfg), window_dim_(FeatureLayout{skel.joint_count()}.window_dim()) {
  trunk_ = learn::Mlp({window_dim_ + kNumBodyParts, cfg.hidden, 1, false});
  std::mt19937_64 rng(seed);
  trunk_.init(rng, 0.1);
  for (int k = 0; k < kNumBodyParts; ++k) masks_[k] = part_feature_mask(skel, static_cast<BodyPart>(k));
}

MatX DiscriminatorEnsemble::wrap(const MatX& windows, int part) const {
  if (windows.rows() != window_dim_) throw ShapeMismatch("discriminator: wrong window width");
  MatX in = MatX::Zero(window_dim_ + kNumBodyParts, windows.cols());
  in.topRows(window_dim_) = windows.array().colwise() * masks_[part].array();
  in.row(window_dim_ + part).setOnes();
  return in;
}

MatX DiscriminatorEnsemble::logits(const MatX& windows, int part) const { return trunk_.forward(wrap(windows, part)); }

MatX DiscriminatorEnsemble::probabilities(const MatX& windows, int part) const {
  const double eps = cfg_.clamp_eps;
  return logits(windows, part).unaryExpr([eps](double l) { return std::clamp(sigmoid(l), eps, 1.0 - eps); });
}

MatX DiscriminatorEnsemble::style_parts(const MatX& windows) const {
  MatX out(kNumBodyParts, windows.cols());
  for (int k = 0; k < kNumBodyParts; ++k)
    out.row(k) = probabilities(windows, k).unaryExpr([](double d) { return -std::log(1.0 - d); });
  return out;
}

DiscLossStats DiscriminatorEnsemble::loss(const MatX& real, const MatX& fake, VecX* grad) const {
  if (real.cols() == 0 || fake.cols() == 0) throw ShapeMismatch("discriminator loss needs nonempty batches");
  const double nr = static_cast<double>(real.cols()), nf = static_cast<double>(fake.cols());
  const double part_w = 1.0 / kNumBodyParts;
  DiscLossStats s;
  for (int k = 0; k < kNumBodyParts; ++k) {
    learn::Mlp::Cache cr, cf;
    const MatX lr = trunk_.forward(wrap(real, k), &cr);
    const MatX lf = trunk_.forward(wrap(fake, k), &cf);
    double bce_r = 0.0, bce_f = 0.0;
    for (Eigen::Index i = 0; i < lr.cols(); ++i) {
      bce_r += softplus(-lr(0, i));
      s.mean_real += sigmoid(lr(0, i)) / nr * part_w;
    }
    for (Eigen::Index i = 0; i < lf.cols(); ++i) {
      bce_f += softplus(lf(0, i));
      s.mean_fake += sigmoid(lf(0, i)) / nf * part_w;
    }
    const double bce = 0.5 * (bce_r / nr + bce_f / nf);

    const MatX u = trunk_.input_gradient(cr);
    MatX gx = MatX::Zero(u.rows(), u.cols());
    gx.topRows(window_dim_) = u.topRows(window_dim_).array().colwise() * masks_[k].array();
    const double pen = cfg_.gp_weight * gx.squaredNorm() / nr;

    s.bce += part_w * bce;
    s.penalty += part_w * pen;

    if (grad) {
      const MatX dr = lr.unaryExpr([&](double l) { return part_w * 0.5 / nr * (sigmoid(l) - 1.0); });
      const MatX df = lf.unaryExpr([&](double l) { return part_w * 0.5 / nf * sigmoid(l); });
      trunk_.backward(cr, dr, *grad);
      trunk_.backward(cf, df, *grad);
      if (cfg_.gp_weight > 0.0) {
        // Masks are 0/1, so d|m*u|^2/du = 2 m*u = 2 gx.
        trunk_.input_gradient_backward(cr, gx * (part_w * cfg_.gp_weight * 2.0 / nr), *grad);
      }
    }
  }
  s.loss = s.bce + s.penalty;
  if (!std::isfinite(s.loss)) throw NonFiniteLoss("discriminator loss is not finite");
  return s;
}

std::pair<std::array<double, 5>, double> style_reward(const DiscriminatorEnsemble& d, const VecX& window) {
  const MatX parts = d.style_parts(window);
  std::array<double, 5> out{};
  double mean = 0.0;
  for (int k = 0; k < kNumBodyParts; ++k) {
    out[k] = parts(k, 0);
    mean += out[k] / kNumBodyParts;
  }
  return {out, mean};
}

DiscLossStats update_discriminators(DiscriminatorEnsemble& d, const MatX& real, const MatX& fake, learn::Adam& opt) {
  VecX grad = VecX::Zero(d.trunk().param_count());
  const auto stats = d.loss(real, fake, &grad);
  opt.step(d.trunk().params(), grad);
  return stats;
}

MatX sample_real_windows(const dataset::MotionDataset& ds, int count, std::mt19937_64& rng) {
  std::vector<int> eligible;
  for (int c = 0; c < ds.size(); ++c)
    if (ds.clips()[c].length() >= kWindowLength) eligible.push_back(c);
  if (eligible.empty()) throw DatasetTooSmall("no clip is long enough for a style window");
  const FeatureLayout layout{ds.skeleton().joint_count()};
  MatX out(layout.window_dim(), count);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(eligible.size()) - 1);
  for (int i = 0; i < count; ++i) {
    const auto& clip = ds.clips()[eligible[pick(rng)]];
    std::uniform_int_distribution<int> start(0, clip.length() - kWindowLength);
    const int s = start(rng);
    for (int f = 0; f < kWindowLength; ++f)
      out.col(i).segment(f * layout.frame_dim(), layout.frame_dim()) = frame_features(clip.frames[s + f]);
  }
  return out;
}

WindowReplay::WindowReplay(int window_dim, int capacity) : dim_(window_dim), capacity_(capacity) {
  if (capacity <= 0) throw ShapeMismatch("replay capacity must be positive");
}

void WindowReplay::push(const VecX& window) {
  if (window.size() != dim_) throw ShapeMismatch("replay: wrong window width");
  if (size() == capacity_) data_.pop_front();
  data_.push_back(window.cast<float>());
}

MatX WindowReplay::sample(int count, std::mt19937_64& rng) const {
  if (data_.empty()) throw EmptyBank("replay is empty");
  std::uniform_int_distribution<int> pick(0, size() - 1);
  MatX out(dim_, count);
  for (int i = 0; i < count; ++i) out.col(i) = data_[pick(rng)].cast<double>();
  return out;
}

}  // namespace mhc::adversary
