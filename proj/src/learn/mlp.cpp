#include "mhc/learn/mlp.hpp"

#include "mhc/errors.hpp"

#include <cmath>

namespace mhc::learn {

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double silu(double x) { return x * sigmoid(x); }

double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

double silu_grad2(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
}

int MlpShape::param_count() const {
  int n = 0, prev = input;
  for (int h : hidden) {
    n += h * prev + h;
    prev = h;
  }
  return n + output * prev + output;
}

void MlpShape::validate() const {
  if (input <= 0 || output <= 0) throw ShapeMismatch("mlp input and output widths must be positive");
  if (hidden.empty()) throw ShapeMismatch("mlp needs at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw ShapeMismatch("mlp hidden widths must be positive");
}

nlohmann::json to_json(const MlpShape& s) {
  return {{"input", s.input}, {"hidden", s.hidden}, {"output", s.output}, {"activate_output", s.activate_output}};
}

MlpShape mlp_shape_from_json(const nlohmann::json& j) {
  MlpShape s;
  s.input = j.at("input").get<int>();
  s.hidden = j.at("hidden").get<std::vector<int>>();
  s.output = j.at("output").get<int>();
  s.activate_output = j.value("activate_output", false);
  s.validate();
  return s;
}

Mlp::Mlp(MlpShape shape) : shape_(std::move(shape)) {
  shape_.validate();
  params_ = VecX::Zero(shape_.param_count());
  int off = 0;
  for (int l = 0; l < shape_.layer_count(); ++l) {
    offsets_.push_back(off);
    off += out_dim(l) * in_dim(l) + out_dim(l);
  }
}

int Mlp::in_dim(int l) const { return l == 0 ? shape_.input : shape_.hidden[l - 1]; }
int Mlp::out_dim(int l) const { return l + 1 == shape_.layer_count() ? shape_.output : shape_.hidden[l]; }
bool Mlp::activated(int l) const { return l + 1 < shape_.layer_count() || shape_.activate_output; }

Mlp::ConstMap Mlp::weight(int l) const { return ConstMap(params_.data() + offsets_[l], out_dim(l), in_dim(l)); }

Eigen::Map<const VecX> Mlp::bias(int l) const {
  return Eigen::Map<const VecX>(params_.data() + offsets_[l] + out_dim(l) * in_dim(l), out_dim(l));
}

void Mlp::init(std::mt19937_64& rng, double output_scale) {
  for (int l = 0; l < shape_.layer_count(); ++l) {
    const double bound = (l + 1 == shape_.layer_count() ? output_scale : 1.0) / std::sqrt(double(in_dim(l)));
    std::uniform_real_distribution<double> u(-bound, bound);
    double* w = params_.data() + offsets_[l];
    for (int i = 0; i < out_dim(l) * in_dim(l); ++i) w[i] = u(rng);
    for (int i = 0; i < out_dim(l); ++i) w[out_dim(l) * in_dim(l) + i] = 0.0;
  }
}

MatX Mlp::forward(const MatX& x, Cache* cache) const {
  if (x.rows() != shape_.input) throw ShapeMismatch("mlp input has the wrong width");
  if (cache) {
    cache->z.clear();
    cache->a.assign(1, x);
  }
  MatX a = x;
  for (int l = 0; l < shape_.layer_count(); ++l) {
    MatX z = weight(l) * a;
    z.colwise() += bias(l);
    a = activated(l) ? MatX(z.unaryExpr(&silu)) : z;
    if (cache) {
      cache->z.push_back(std::move(z));
      cache->a.push_back(a);
    }
  }
  return a;
}

MatX Mlp::backward(const Cache& cache, const MatX& d_out, VecX& grad) const {
  if (grad.size() != param_count()) throw ShapeMismatch("gradient vector has the wrong size");
  if (d_out.rows() != shape_.output || d_out.cols() != cache.a[0].cols())
    throw ShapeMismatch("mlp output gradient has the wrong shape");
  MatX d = d_out;
  for (int l = shape_.layer_count() - 1; l >= 0; --l) {
    if (activated(l)) d = d.cwiseProduct(cache.z[l].unaryExpr(&silu_grad));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw(
        grad.data() + offsets_[l], out_dim(l), in_dim(l));
    gw.noalias() += d * cache.a[l].transpose();
    grad.segment(offsets_[l] + out_dim(l) * in_dim(l), out_dim(l)) += d.rowwise().sum();
    d = weight(l).transpose() * d;
  }
  return d;
}

MatX Mlp::input_gradient(const Cache& cache) const {
  if (shape_.output != 1 || shape_.activate_output)
    throw ShapeMismatch("input gradients need a scalar linear output");
  const int L = shape_.layer_count();
  const int n = static_cast<int>(cache.a[0].cols());
  MatX u = weight(L - 1).transpose() * MatX::Ones(1, n);
  for (int l = L - 2; l >= 0; --l) u = weight(l).transpose() * u.cwiseProduct(cache.z[l].unaryExpr(&silu_grad));
  return u;
}

void Mlp::input_gradient_backward(const Cache& cache, const MatX& d_input_grad, VecX& grad) const {
  if (shape_.output != 1 || shape_.activate_output)
    throw ShapeMismatch("input gradients need a scalar linear output");
  if (grad.size() != param_count()) throw ShapeMismatch("gradient vector has the wrong size");
  const int L = shape_.layer_count();
  const int n = static_cast<int>(cache.a[0].cols());
  using RowMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  // Recompute the input-gradient pass: u[l] = d out / d a[l].
  std::vector<MatX> u(L), sp(L - 1);
  u[L - 1] = weight(L - 1).transpose() * MatX::Ones(1, n);
  for (int l = L - 2; l >= 0; --l) {
    sp[l] = cache.z[l].unaryExpr(&silu_grad);
    u[l] = weight(l).transpose() * u[l + 1].cwiseProduct(sp[l]);
  }

  // Reverse through that pass, from u[0] upward.
  std::vector<MatX> zbar(L - 1);
  MatX ubar = d_input_grad;
  for (int l = 0; l <= L - 2; ++l) {
    const MatX delta = u[l + 1].cwiseProduct(sp[l]);
    RowMap(grad.data() + offsets_[l], out_dim(l), in_dim(l)).noalias() += delta * ubar.transpose();
    const MatX delta_bar = weight(l) * ubar;
    zbar[l] = delta_bar.cwiseProduct(u[l + 1]).cwiseProduct(cache.z[l].unaryExpr(&silu_grad2));
    ubar = delta_bar.cwiseProduct(sp[l]);
  }
  RowMap(grad.data() + offsets_[L - 1], 1, in_dim(L - 1)) += ubar.rowwise().sum().transpose();

  // Pre-activations feed forward into later layers; push zbar back down.
  MatX carry;
  for (int l = L - 2; l >= 0; --l) {
    MatX dz = zbar[l];
    if (carry.size()) dz += carry;
    RowMap(grad.data() + offsets_[l], out_dim(l), in_dim(l)).noalias() += dz * cache.a[l].transpose();
    grad.segment(offsets_[l] + out_dim(l) * in_dim(l), out_dim(l)) += dz.rowwise().sum();
    if (l > 0) carry = (weight(l).transpose() * dz).cwiseProduct(sp[l - 1]);
  }
}

}  // namespace mhc::learn
