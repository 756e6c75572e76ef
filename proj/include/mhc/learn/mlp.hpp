#pragma once

#include "mhc/types.hpp"

#include <json.hpp>

#include <random>
#include <vector>

namespace mhc::learn {

double silu(double x);
double silu_grad(double x);
double silu_grad2(double x);

struct MlpShape {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;
  /// Apply SiLU to the output layer too (used for feature encoders).
  bool activate_output = false;

  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
  int param_count() const;
  /// Throws ShapeMismatch.
  void validate() const;
  bool operator==(const MlpShape&) const = default;
};

nlohmann::json to_json(const MlpShape& s);
MlpShape mlp_shape_from_json(const nlohmann::json& j);

/// Fully connected SiLU network. Parameters live in one flat vector laid out
/// layer by layer as [W (row-major out x in), b]; batches are column-major
/// (one sample per column).
class Mlp {
 public:
  struct Cache {
    std::vector<MatX> z;  // pre-activations per layer
    std::vector<MatX> a;  // a[0] = input, a[l+1] = output of layer l
  };

  Mlp() = default;
  explicit Mlp(MlpShape shape);

  const MlpShape& shape() const { return shape_; }
  int param_count() const { return static_cast<int>(params_.size()); }
  VecX& params() { return params_; }
  const VecX& params() const { return params_; }

  /// Uniform(+-1/sqrt(fan_in)) weights, zero biases; the last layer is
  /// scaled by `output_scale`.
  void init(std::mt19937_64& rng, double output_scale = 1.0);

  MatX forward(const MatX& x, Cache* cache = nullptr) const;

  /// Accumulates dL/dparams into `grad` and returns dL/dx.
  MatX backward(const Cache& cache, const MatX& d_out, VecX& grad) const;

  /// For a scalar-output net: d output / d input per sample (input x batch).
  MatX input_gradient(const Cache& cache) const;

  /// Given dP/d(input_gradient), accumulates dP/dparams into `grad`
  /// (second-order backprop through input_gradient).
  void input_gradient_backward(const Cache& cache, const MatX& d_input_grad, VecX& grad) const;

 private:
  using ConstMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  ConstMap weight(int layer) const;
  Eigen::Map<const VecX> bias(int layer) const;
  int in_dim(int layer) const;
  int out_dim(int layer) const;
  bool activated(int layer) const;

  MlpShape shape_;
  VecX params_;
  std::vector<int> offsets_;
};

}  // namespace mhc::learn
