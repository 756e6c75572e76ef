#pragma once

#include "mhc/motion/rotation.hpp"
#include "mhc/types.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <random>

namespace mhc::test {

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_vec3(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Rot6 random_rot6(std::mt19937_64& rng) {
  return motion::matrix_to_sixd(random_rotation(rng));
}

}  // namespace mhc::test

namespace mhc::test {

/// Central differences of f over every entry of `x` (restored afterwards).
template <typename F>
VecX numeric_gradient(VecX& x, F&& f, double h = 1e-6) {
  VecX g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f();
    x[i] = keep - h;
    const double fm = f();
    x[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const VecX& a, const VecX& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-10});
  return (a - b).norm() / scale;
}

}  // namespace mhc::test
