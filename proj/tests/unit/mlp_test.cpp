#include "mhc/errors.hpp"
#include "mhc/learn/adam.hpp"
#include "mhc/learn/checkpoint.hpp"
#include "mhc/learn/mlp.hpp"
#include "mhc/learn/normalizer.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

using namespace mhc;
using namespace mhc::learn;

namespace {

MatX random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  MatX m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("silu and its derivatives") {
  CHECK(silu(0.0) == 0.0);
  CHECK(silu_grad(0.0) == 0.5);
  for (double x : {-3.0, -0.7, 0.2, 1.5, 4.0}) {
    const double h = 1e-5;
    CHECK(silu_grad(x) == doctest::Approx((silu(x + h) - silu(x - h)) / (2 * h)).epsilon(1e-8));
    CHECK(silu_grad2(x) == doctest::Approx((silu_grad(x + h) - silu_grad(x - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("zero network outputs zero") {
  Mlp net({4, {8, 8}, 3});
  const MatX y = net.forward(MatX::Ones(4, 2));
  CHECK(y.isZero(0.0));
}

TEST_CASE("1-1-1 network by hand") {
  Mlp net({1, {1}, 1});
  net.params() << 2.0, -0.3, 1.5, 0.1;  // W1, b1, W2, b2
  const double z = 2.0 * 0.5 - 0.3;
  const double a = z / (1.0 + std::exp(-z));
  MatX x(1, 1);
  x << 0.5;
  CHECK(net.forward(x)(0, 0) == doctest::Approx(1.5 * a + 0.1).epsilon(1e-15));
}

TEST_CASE("shape checks") {
  CHECK_THROWS_AS(Mlp({3, {}, 1}), ShapeMismatch);
  CHECK_THROWS_AS(Mlp({3, {0}, 1}), ShapeMismatch);
  Mlp net({3, {4}, 2});
  CHECK(net.param_count() == 3 * 4 + 4 + 4 * 2 + 2);
  CHECK_THROWS_AS(net.forward(MatX::Zero(2, 1)), ShapeMismatch);
  Mlp::Cache c;
  net.forward(MatX::Zero(3, 1), &c);
  CHECK_THROWS_AS(net.input_gradient(c), ShapeMismatch);
}

TEST_CASE("parameter and input gradients match finite differences") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const bool act = trial % 2 == 1;
    Mlp net({5, {7, 6}, 3, act});
    net.init(rng);
    net.params() += random_matrix(rng, net.param_count(), 1, 0.1);
    MatX x = random_matrix(rng, 5, 4);
    const MatX w = random_matrix(rng, 3, 4);
    auto loss = [&] { return net.forward(x).cwiseProduct(w).sum(); };
    Mlp::Cache cache;
    net.forward(x, &cache);
    VecX g = VecX::Zero(net.param_count());
    const MatX dx = net.backward(cache, w, g);
    CHECK(test::relative_error(g, test::numeric_gradient(net.params(), loss)) < 1e-6);
    VecX xv = Eigen::Map<VecX>(x.data(), x.size());
    auto loss_x = [&] {
      x = Eigen::Map<MatX>(xv.data(), 5, 4);
      return loss();
    };
    const VecX num_dx = test::numeric_gradient(xv, loss_x);
    CHECK(test::relative_error(Eigen::Map<const VecX>(dx.data(), dx.size()), num_dx) < 1e-6);
  }
}

TEST_CASE("input gradient and its second-order backprop") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> hidden = trial % 3 == 0 ? std::vector<int>{6} : trial % 3 == 1 ? std::vector<int>{6, 5}
                                                                                    : std::vector<int>{6, 5, 4};
    Mlp net({4, hidden, 1});
    net.init(rng);
    net.params() += random_matrix(rng, net.param_count(), 1, 0.2);
    MatX x = random_matrix(rng, 4, 3);
    Mlp::Cache cache;
    net.forward(x, &cache);
    const MatX u = net.input_gradient(cache);

    // Input gradient against finite differences of the output sum.
    VecX xv = Eigen::Map<VecX>(x.data(), x.size());
    auto out = [&] { return net.forward(Eigen::Map<MatX>(xv.data(), 4, 3)).sum(); };
    CHECK(test::relative_error(Eigen::Map<const VecX>(u.data(), u.size()), test::numeric_gradient(xv, out)) < 1e-6);

    // P = sum(c .* u^2) against finite differences in the parameters.
    const MatX c = random_matrix(rng, 4, 3);
    auto penalty = [&] {
      Mlp::Cache k;
      net.forward(x, &k);
      return net.input_gradient(k).cwiseAbs2().cwiseProduct(c).sum();
    };
    VecX g = VecX::Zero(net.param_count());
    net.input_gradient_backward(cache, 2.0 * c.cwiseProduct(u), g);
    CHECK(test::relative_error(g, test::numeric_gradient(net.params(), penalty)) < 1e-6);
  }
}

TEST_CASE("forward is deterministic") {
  std::mt19937_64 a(9), b(9);
  Mlp n1({6, {5}, 2}), n2({6, {5}, 2});
  n1.init(a);
  n2.init(b);
  CHECK(n1.params() == n2.params());
  const MatX x = MatX::Constant(6, 3, 0.3);
  CHECK(n1.forward(x) == n2.forward(x));
}

TEST_CASE("adam") {
  VecX p = VecX::Constant(3, 1.0);
  Adam zero(3, {0.0, 0.9, 0.999, 1e-8, 0.0});
  zero.step(p, VecX::Constant(3, 5.0));
  CHECK(p == VecX::Constant(3, 1.0));

  // First step moves each coordinate by lr against the gradient sign.
  Adam opt(3, {0.1, 0.9, 0.999, 1e-8, 0.0});
  VecX g(3);
  g << 2.0, -0.5, 0.0;
  opt.step(p, g);
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p[1] == doctest::Approx(1.1).epsilon(1e-7));
  CHECK(p[2] == 1.0);

  // Minimises a quadratic.
  VecX q = VecX::Constant(4, 3.0);
  Adam o2(4, {0.05, 0.9, 0.999, 1e-8, 1.0});
  for (int i = 0; i < 2000; ++i) o2.step(q, 2.0 * q);
  CHECK(q.norm() < 1e-2);
  VecX bad = VecX::Constant(4, std::nan(""));
  CHECK_THROWS_AS(o2.step(q, bad), NonFiniteLoss);
}

TEST_CASE("running normalizer matches batch statistics") {
  std::mt19937_64 rng(4);
  const MatX all = random_matrix(rng, 3, 90, 2.0).array() + 1.0;
  RunningNormalizer n(3);
  n.update(all.leftCols(10));
  n.update(all.middleCols(10, 50));
  n.update(all.rightCols(30));
  const VecX mean = all.rowwise().mean();
  const VecX var = (all.colwise() - mean).cwiseAbs2().rowwise().mean();
  CHECK((n.mean() - mean).norm() < 1e-12);
  CHECK((n.var() - var).norm() < 1e-12);
  const MatX z = n.normalize(all);
  CHECK(z.maxCoeff() <= 5.0);
  CHECK(z.rowwise().mean().norm() < 0.2);
}

TEST_CASE("tensor file round trip is byte identical") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto p1 = dir / "mhc_tf1.ckpt", p2 = dir / "mhc_tf2.ckpt";
  TensorFile f;
  f.meta = {{"kind", "test"}, {"iteration", 3}};
  std::mt19937_64 rng(5);
  f.tensors["b"] = random_matrix(rng, 17, 1);
  f.tensors["a"] = random_matrix(rng, 4, 1);
  f.tensors["empty"] = VecX();
  write_tensor_file(f, p1);
  const auto g = read_tensor_file(p1);
  CHECK(g.meta == f.meta);
  CHECK(g.at("b") == f.tensors["b"]);
  write_tensor_file(g, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK_THROWS_AS(g.at("missing"), SchemaError);

  std::ofstream(p2, std::ios::binary) << "garbage";
  CHECK_THROWS_AS(read_tensor_file(p2), SchemaError);
  auto bytes = slurp(p1);
  bytes.resize(bytes.size() - 8);
  std::ofstream(p2, std::ios::binary | std::ios::trunc) << bytes;
  CHECK_THROWS_AS(read_tensor_file(p2), SchemaError);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}
