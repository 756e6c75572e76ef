#include "mhc/learn/normalizer.hpp"

#include "mhc/errors.hpp"

namespace mhc::learn {

RunningNormalizer::RunningNormalizer(int dim, double clip)
    : mean_(VecX::Zero(dim)), var_(VecX::Ones(dim)), clip_(clip) {}

void RunningNormalizer::update(const MatX& batch) {
  if (batch.rows() != dim()) throw ShapeMismatch("normalizer: wrong feature width");
  const double n = static_cast<double>(batch.cols());
  if (n == 0) return;
  const VecX bmean = batch.rowwise().mean();
  const VecX bvar = (batch.colwise() - bmean).cwiseAbs2().rowwise().mean();
  const double total = count_ + n;
  const VecX delta = bmean - mean_;
  if (count_ == 0.0) {
    mean_ = bmean;
    var_ = bvar;
  } else {
    mean_ += delta * (n / total);
    var_ = (var_ * count_ + bvar * n + delta.cwiseAbs2() * (count_ * n / total)) / total;
  }
  count_ = total;
}

MatX RunningNormalizer::normalize(const MatX& batch) const {
  if (batch.rows() != dim()) throw ShapeMismatch("normalizer: wrong feature width");
  const VecX inv_std = (var_.array() + 1e-8).rsqrt().matrix();
  MatX out = (batch.colwise() - mean_).array().colwise() * inv_std.array();
  return out.cwiseMax(-clip_).cwiseMin(clip_);
}

void RunningNormalizer::set_state(VecX mean, VecX var, double count) {
  if (mean.size() != var.size()) throw ShapeMismatch("normalizer: mean/var size mismatch");
  mean_ = std::move(mean);
  var_ = std::move(var);
  count_ = count;
}

}  // namespace mhc::learn
