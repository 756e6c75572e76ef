#include "mhc/learn/adam.hpp"

#include "mhc/errors.hpp"

#include <cmath>

namespace mhc::learn {

void Adam::step(VecX& params, VecX grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw ShapeMismatch("adam: size mismatch");
  if (!grad.allFinite()) throw NonFiniteLoss("adam: non-finite gradient");
  if (cfg_.max_grad_norm > 0.0) {
    const double n = grad.norm();
    if (n > cfg_.max_grad_norm) grad *= cfg_.max_grad_norm / n;
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  params.array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
}

}  // namespace mhc::learn
