#include "mhc/adversary/discriminator.hpp"
#include "mhc/dataset/synthetic.hpp"
#include "mhc/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mhc;
using namespace mhc::adversary;

namespace {

const dataset::MotionDataset& synth4() {
  static const auto ds = dataset::synthetic_dataset(motion::sim13(), 4);
  return ds;
}

DiscriminatorConfig small_config() {
  DiscriminatorConfig c;
  c.hidden = {12, 8};
  return c;
}

// Selected parameter coordinates, central differences.
double sampled_gradient_error(DiscriminatorEnsemble& d, const MatX& real, const MatX& fake, std::mt19937_64& rng,
                              int coords) {
  VecX g = VecX::Zero(d.trunk().param_count());
  d.loss(real, fake, &g);
  std::uniform_int_distribution<int> pick(0, d.trunk().param_count() - 1);
  VecX a(coords), n(coords);
  for (int i = 0; i < coords; ++i) {
    const int idx = pick(rng);
    double& p = d.trunk().params()[idx];
    const double keep = p, h = 1e-6;
    p = keep + h;
    const double lp = d.loss(real, fake).loss;
    p = keep - h;
    const double lm = d.loss(real, fake).loss;
    p = keep;
    a[i] = g[idx];
    n[i] = (lp - lm) / (2 * h);
  }
  return test::relative_error(a, n);
}

}  // namespace

TEST_CASE("window features") {
  const auto& clip = synth4().clips()[0];
  std::vector<Pose> frames(clip.frames.begin(), clip.frames.begin() + kWindowLength);
  const VecX w = window_features(frames);
  const FeatureLayout layout{14};
  CHECK(w.size() == layout.window_dim());
  CHECK(w[0] == doctest::Approx(clip.frames[0].height()));
  frames.pop_back();
  CHECK_THROWS_AS(window_features(frames), ShapeMismatch);

  const auto skel = motion::sim13();
  VecX total = VecX::Zero(layout.window_dim());
  for (int k = 0; k < 4; ++k) total += part_feature_mask(skel, static_cast<BodyPart>(k));
  // The four disjoint parts cover every feature exactly once.
  CHECK(total == VecX::Ones(layout.window_dim()));
  CHECK(part_feature_mask(skel, BodyPart::kFullBody) == VecX::Ones(layout.window_dim()));
}

TEST_CASE("style reward arithmetic") {
  DiscriminatorEnsemble d(motion::sim13(), small_config(), 1);
  std::mt19937_64 rng(1);
  const MatX w = sample_real_windows(synth4(), 1, rng);
  d.trunk().params().setZero();
  auto [parts, r] = style_reward(d, w.col(0));
  for (double p : parts) CHECK(p == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(r == doctest::Approx(0.6931).epsilon(1e-4));

  // The output bias is the final parameter.
  d.trunk().params()[d.trunk().param_count() - 1] = -100.0;
  std::tie(parts, r) = style_reward(d, w.col(0));
  CHECK(r == doctest::Approx(-std::log(0.99)).epsilon(1e-12));
  CHECK(r == doctest::Approx(0.01005).epsilon(1e-3));
  d.trunk().params()[d.trunk().param_count() - 1] = 100.0;
  std::tie(parts, r) = style_reward(d, w.col(0));
  CHECK(r == doctest::Approx(-std::log(0.01)).epsilon(1e-12));
  CHECK(r == doctest::Approx(4.605).epsilon(1e-3));
}

TEST_CASE("style reward stays within the clamp bounds") {
  DiscriminatorEnsemble d(motion::sim13(), small_config(), 2);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 3.0);
  for (auto& p : d.trunk().params()) p = n(rng);
  const MatX w = sample_real_windows(synth4(), 64, rng);
  const MatX parts = d.style_parts(w);
  CHECK(parts.minCoeff() >= -std::log(0.99) - 1e-12);
  CHECK(parts.maxCoeff() <= -std::log(0.01) + 1e-12);
}

TEST_CASE("constant discriminator loss is ln 2") {
  DiscriminatorEnsemble d(motion::sim13(), small_config(), 3);
  d.trunk().params().setZero();
  std::mt19937_64 rng(3);
  const MatX real = sample_real_windows(synth4(), 8, rng);
  const MatX fake = MatX::Zero(real.rows(), 8);
  const auto s = d.loss(real, fake);
  CHECK(s.bce == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(s.penalty == 0.0);
  CHECK(s.mean_real == doctest::Approx(0.5));
  CHECK_THROWS_AS(d.loss(real, MatX(real.rows(), 0)), ShapeMismatch);
}

TEST_CASE("discriminator gradients match finite differences") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 6; ++trial) {
    auto cfg = small_config();
    if (trial % 2) cfg.hidden = {10, 8, 6};
    DiscriminatorEnsemble d(motion::sim13(), cfg, 100 + trial);
    std::normal_distribution<double> n(0.0, 0.05);
    for (auto& p : d.trunk().params()) p += n(rng);
    const MatX real = sample_real_windows(synth4(), 5, rng);
    MatX fake = real;
    for (Eigen::Index i = 0; i < fake.size(); ++i) fake.data()[i] += n(rng) * 10.0;
    CHECK(sampled_gradient_error(d, real, fake, rng, 150) < 1e-4);
  }
}

TEST_CASE("part isolation") {
  const auto skel = motion::sim13();
  DiscriminatorEnsemble d(skel, small_config(), 5);
  std::mt19937_64 rng(5);
  const auto& clip = synth4().clips()[1];
  std::vector<Pose> frames(clip.frames.begin() + 20, clip.frames.begin() + 20 + kWindowLength);
  const VecX base = window_features(frames);
  for (int k = 0; k < 4; ++k) {
    const auto& mine = skel.part_channels(static_cast<BodyPart>(k));
    auto perturbed = frames;
    for (auto& f : perturbed)
      for (int c = 0; c < 14; ++c) {
        if (std::find(mine.begin(), mine.end(), c) != mine.end()) continue;
        f.joint_rot[c] = test::random_rot6(rng);
        f.joint_local[c] += test::random_vec3(rng);
      }
    if (k != static_cast<int>(BodyPart::kRoot))
      for (auto& f : perturbed) {
        f.root.position.z() += 0.3;
        f.root.linear_velocity += test::random_vec3(rng);
      }
    const VecX w = window_features(perturbed);
    CHECK(w != base);
    CHECK(d.logits(w, k)(0, 0) == d.logits(base, k)(0, 0));
    CHECK(d.logits(w, 4)(0, 0) != d.logits(base, 4)(0, 0));
  }
}

TEST_CASE("discriminator update") {
  std::mt19937_64 rng(6);
  const MatX real = sample_real_windows(synth4(), 32, rng);
  MatX fake = real.array() + 0.5;

  DiscriminatorEnsemble d(motion::sim13(), small_config(), 7);
  const VecX before = d.trunk().params();
  learn::Adam zero(d.trunk().param_count(), {0.0, 0.9, 0.999, 1e-8, 1.0});
  update_discriminators(d, real, fake, zero);
  CHECK(d.trunk().params() == before);

  learn::Adam opt(d.trunk().param_count(), {1e-3, 0.9, 0.999, 1e-8, 1.0});
  const double l0 = d.loss(real, fake).loss;
  update_discriminators(d, real, fake, opt);
  CHECK(d.loss(real, fake).loss < l0);

  auto cfg = small_config();
  cfg.gp_weight = 0.0;
  DiscriminatorEnsemble sep(motion::sim13(), cfg, 8);
  learn::Adam o2(sep.trunk().param_count(), {3e-3, 0.9, 0.999, 1e-8, 0.0});
  for (int i = 0; i < 300; ++i) update_discriminators(sep, real, fake, o2);
  const auto s = sep.loss(real, fake);
  CHECK(s.loss < 0.02);
  CHECK(s.loss > 0.0);

  DiscriminatorEnsemble a(motion::sim13(), small_config(), 9), b(motion::sim13(), small_config(), 9);
  learn::Adam oa(a.trunk().param_count(), {1e-3}), ob(b.trunk().param_count(), {1e-3});
  for (int i = 0; i < 3; ++i) {
    update_discriminators(a, real, fake, oa);
    update_discriminators(b, real, fake, ob);
  }
  CHECK(a.trunk().params() == b.trunk().params());
}

TEST_CASE("window replay is a bounded FIFO") {
  WindowReplay r(3, 4);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(r.sample(1, rng), EmptyBank);
  for (int i = 0; i < 6; ++i) r.push(VecX::Constant(3, double(i)));
  CHECK(r.size() == 4);
  const MatX s = r.sample(200, rng);
  CHECK(s.minCoeff() == 2.0);
  CHECK(s.maxCoeff() == 5.0);
  CHECK_THROWS_AS(r.push(VecX::Zero(2)), ShapeMismatch);
}
