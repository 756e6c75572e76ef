#pragma once

#include "mhc/types.hpp"

#include <Eigen/Geometry>

#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mhc::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int order = 0;
  std::string id;
  std::string title;
  double budget_s = 0.0;  // 0: no runtime bound
  std::function<Outcome()> run;
};

std::vector<Criterion>& registry();

struct Register {
  Register(int order, std::string id, std::string title, double budget_s, std::function<Outcome()> run) {
    registry().push_back({order, std::move(id), std::move(title), budget_s, std::move(run)});
  }
};

/// printf into a std::string.
template <typename... Args>
std::string fmt(const char* f, Args... args) {
  const int n = std::snprintf(nullptr, 0, f, args...);
  std::string s(static_cast<std::size_t>(n), '\0');
  std::snprintf(s.data(), s.size() + 1, f, args...);
  return s;
}

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

inline double relative_error(const VecX& a, const VecX& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-10});
  return (a - b).norm() / scale;
}

}  // namespace mhc::acceptance
