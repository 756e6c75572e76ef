#pragma once

#include "mhc/types.hpp"

namespace mhc::learn {

/// Running mean/variance of observation features (batched Welford).
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  RunningNormalizer(int dim, double clip = 5.0);

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const VecX& mean() const { return mean_; }
  const VecX& var() const { return var_; }
  double clip() const { return clip_; }

  /// Columns are samples.
  void update(const MatX& batch);
  MatX normalize(const MatX& batch) const;

  void set_state(VecX mean, VecX var, double count);

 private:
  VecX mean_, var_;
  double count_ = 0.0;
  double clip_ = 5.0;
};

}  // namespace mhc::learn
