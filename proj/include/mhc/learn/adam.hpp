#pragma once

#include "mhc/types.hpp"

namespace mhc::learn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Global gradient-norm clip; <= 0 disables.
  double max_grad_norm = 1.0;
};

class Adam {
 public:
  Adam() = default;
  Adam(int size, AdamConfig cfg) : cfg_(cfg), m_(VecX::Zero(size)), v_(VecX::Zero(size)) {}

  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  long steps() const { return t_; }

  void step(VecX& params, VecX grad);

  VecX& first_moment() { return m_; }
  VecX& second_moment() { return v_; }
  void set_steps(long t) { t_ = t; }

 private:
  AdamConfig cfg_;
  VecX m_, v_;
  long t_ = 0;
};

}  // namespace mhc::learn
