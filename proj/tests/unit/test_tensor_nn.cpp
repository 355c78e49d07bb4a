#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "generators.hpp"
#include "iris3d/checkpoint.hpp"
#include "iris3d/error.hpp"
#include "iris3d/nn.hpp"
#include "oracles.hpp"

using namespace iris3d;
using namespace iris3d::nn;
using iris3d::testing::Gen;

namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("tensor rejects non-finite values and bad shapes") {
  CHECK_THROWS_AS(Tensor({2}, std::vector<double>{1.0, std::nan("")}), InvariantError);
  CHECK_THROWS_AS(Tensor({2}, std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), InvariantError);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({3}, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST_CASE("identity 1x1 kernel leaves the input unchanged") {
  Gen g(1);
  const Tensor x = g.tensor({1, 5, 7});
  const Tensor y = conv2d(x, Tensor({1, 1, 1, 1}, 1.0), Tensor({1}, 0.0), 1, 0);
  CHECK(max_abs_diff(x, y) == 0.0);
}

TEST_CASE("all-ones 2x2 kernel with stride 2 sums blocks") {
  const Tensor y = conv2d(Tensor({1, 4, 4}, 1.0), Tensor({1, 1, 2, 2}, 1.0), Tensor({1}, 0.0), 2, 0);
  CHECK(y.shape() == Shape{1, 2, 2});
  for (double v : y.data()) CHECK(v == 4.0);
}

TEST_CASE("conv2d matches the direct loop summation") {
  Gen g(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int stride = g.integer(1, 2), pad = g.integer(0, 1), k = 2 * g.integer(0, 1) + 1;
    const std::size_t cin = static_cast<std::size_t>(g.integer(1, 3)), cout = static_cast<std::size_t>(g.integer(1, 4));
    std::size_t h = 5, w = 5;
    if ((h + 2 * pad - k) % stride != 0) h += 1, w += 1;
    const Tensor x = g.tensor({cin, h, w});
    const Tensor wt = g.tensor({cout, cin, static_cast<std::size_t>(k), static_cast<std::size_t>(k)});
    const Tensor b = g.tensor({cout});
    CHECK(max_abs_diff(conv2d(x, wt, b, stride, pad), iris3d::testing::conv2d_naive(x, wt, b, stride, pad)) < 1e-12);
  }
  const Tensor x = g.tensor({2, 5, 5});
  const Tensor wt = g.tensor({3, 2, 3, 3});
  const Tensor b = g.tensor({3});
  CHECK(max_abs_diff(conv2d(x, wt, b, 1, 1), iris3d::testing::conv2d_naive(x, wt, b, 1, 1)) < 1e-12);
}

TEST_CASE("conv2d rejects mismatched channels and inexact output size") {
  CHECK_THROWS_AS(conv2d(Tensor({2, 4, 4}), Tensor({1, 3, 1, 1}), Tensor({1}), 1, 0), ShapeError);
  CHECK_THROWS_AS(conv2d(Tensor({1, 5, 5}), Tensor({1, 1, 2, 2}), Tensor({1}), 2, 0), ShapeError);
}

TEST_CASE("conv2d is linear in its input") {
  Gen g(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = g.tensor({2, 6, 6}), y = g.tensor({2, 6, 6}), w = g.tensor({3, 2, 3, 3});
    const Tensor zero({3}, 0.0);
    const double a = g.uniform(-2, 2), b = g.uniform(-2, 2);
    Tensor mix({2, 6, 6});
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const Tensor lhs = conv2d(mix, w, zero, 1, 1);
    const Tensor cx = conv2d(x, w, zero, 1, 1), cy = conv2d(y, w, zero, 1, 1);
    Tensor rhs(lhs.shape());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * cx[i] + b * cy[i];
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("elementwise and pooling definitions") {
  const Tensor r = relu(Tensor({3, 1, 1}, std::vector<double>{-1, 0, 2}));
  CHECK(r.values() == std::vector<double>{0, 0, 2});
  const auto p = maxpool2x2(Tensor({1, 2, 2}, std::vector<double>{1, 2, 3, 4}));
  CHECK(p.y.shape() == Shape{1, 1, 1});
  CHECK(p.y[0] == 4.0);
  CHECK(softmax_ce(Tensor({2}, 0.0), 0).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(softmax_ce(Tensor({2}, 0.0), 2), ShapeError);
}

TEST_CASE("concat rejects spatial mismatch and split inverts it") {
  Gen g(4);
  const std::vector<Tensor> parts{g.tensor({2, 3, 3}), g.tensor({1, 3, 3})};
  const Tensor c = concat_channels(parts);
  CHECK(c.shape() == Shape{3, 3, 3});
  const std::vector<std::size_t> ch{2, 1};
  const auto back = split_channels(c, ch);
  CHECK(max_abs_diff(back[0], parts[0]) == 0.0);
  CHECK(max_abs_diff(back[1], parts[1]) == 0.0);
  const std::vector<Tensor> bad{g.tensor({1, 3, 3}), g.tensor({1, 2, 3})};
  CHECK_THROWS_AS(concat_channels(bad), ShapeError);
}

TEST_CASE("bilinear upsampling preserves constants and has an adjoint backward") {
  Gen g(5);
  const Tensor c = upsample_bilinear2x(Tensor({2, 3, 4}, 1.5));
  CHECK(c.shape() == Shape{2, 6, 8});
  for (double v : c.data()) CHECK(v == doctest::Approx(1.5).epsilon(1e-15));
  // <U x, y> = <x, U^T y>
  const Tensor x = g.tensor({2, 3, 4}), y = g.tensor({2, 6, 8});
  CHECK(dot(upsample_bilinear2x(x), y) == doctest::Approx(dot(x, upsample_bilinear2x_backward(y))).epsilon(1e-12));
}

TEST_CASE("layer backward before forward is rejected") {
  Conv2d conv("c", 1, 1, 1, 1, 0);
  CHECK_THROWS_AS(conv.backward(Tensor({1, 2, 2})), InvariantError);
  ReLU r;
  CHECK_THROWS_AS(r.backward(Tensor({1, 2, 2})), InvariantError);
  MaxPool2x2 mp;
  CHECK_THROWS_AS(mp.backward(Tensor({1, 1, 1})), InvariantError);
}

TEST_CASE("constant-zero loss gives zero gradients") {
  Gen g(6);
  Conv2d conv("c", 2, 3, 3, 1, 1);
  conv.init_he(g.engine());
  conv.weight.zero_grad();
  conv.bias.zero_grad();
  const Tensor y = conv.forward(g.tensor({2, 4, 4}));
  conv.backward(Tensor(y.shape(), 0.0));
  for (double v : conv.weight.grad.data()) CHECK(v == 0.0);
  for (double v : conv.bias.grad.data()) CHECK(v == 0.0);
}

TEST_CASE("single linear layer with quadratic loss matches the closed form") {
  // y = W x + b, L = 0.5 |y - t|^2 => dW = (y - t) x^T, db = y - t
  Gen g(7);
  Conv2d lin("lin", 4, 3, 1, 1, 0);
  lin.init_he(g.engine());
  lin.weight.zero_grad();
  lin.bias.zero_grad();
  const Tensor x = g.tensor({4, 1, 1}), t = g.tensor({3, 1, 1});
  const Tensor y = lin.forward(x);
  Tensor r(y.shape());
  for (std::size_t i = 0; i < 3; ++i) r[i] = y[i] - t[i];
  lin.backward(r);
  for (std::size_t o = 0; o < 3; ++o) {
    CHECK(std::abs(lin.bias.grad[o] - r[o]) < 1e-10);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(lin.weight.grad[o * 4 + i] - r[o] * x[i]) < 1e-10);
  }
}

TEST_CASE("gradients of a small composite graph match finite differences") {
  Gen g(8);
  Conv2d c1("c1", 2, 4, 3, 1, 1), c2("c2", 4, 3, 1, 1, 0);
  c1.init_he(g.engine());
  c2.init_he(g.engine());
  ReLU r;
  MaxPool2x2 mp;
  const Tensor x = g.tensor({2, 6, 6});
  const int label = 1;
  const auto forward = [&] {
    const Tensor h = upsample_bilinear2x(mp.forward(r.forward(c1.forward(x))));
    return global_maxpool(c2.forward(h));
  };
  const auto loss = [&] { return softmax_ce(forward().y, label).loss; };
  std::vector<Param*> params{&c1.weight, &c1.bias, &c2.weight, &c2.bias};
  zero_grads(params);
  const Tensor h = upsample_bilinear2x(mp.forward(r.forward(c1.forward(x))));
  const Tensor z = c2.forward(h);
  const auto pooled = global_maxpool(z);
  const auto lg = softmax_ce(pooled.y, label);
  const Tensor dz = pool_backward(z.shape(), pooled.argmax, lg.dlogits);
  c1.backward(r.backward(mp.backward(upsample_bilinear2x_backward(c2.backward(dz)))));
  const auto gc = iris3d::testing::check_gradients(params, loss, 60, 99);
  CHECK(gc.max_rel_error < 1e-4);
}

TEST_CASE("forward passes are bitwise deterministic") {
  Gen g(9);
  const Tensor x = g.tensor({3, 8, 8}), w = g.tensor({5, 3, 3, 3}), b = g.tensor({5});
  const Tensor a = conv2d(x, w, b, 1, 1), c = conv2d(x, w, b, 1, 1);
  CHECK(a.values() == c.values());
}

TEST_CASE("sgd with momentum follows v = m v - lr g") {
  Param p("p", Tensor({1}, 1.0));
  Sgd sgd(0.1, 0.9);
  std::vector<Param*> ps{&p};
  p.grad[0] = 2.0;
  sgd.step(ps);  // v = -0.2
  CHECK(p.value[0] == doctest::Approx(0.8));
  sgd.step(ps);  // v = -0.18 - 0.2
  CHECK(p.value[0] == doctest::Approx(0.42));
}

TEST_CASE("checkpoint round trip and mismatch detection") {
  Gen g(10);
  Param a("enc.w", g.tensor({2, 3, 1, 1})), b("enc.b", g.tensor({2}));
  const std::vector<const Param*> out{&a, &b};
  std::stringstream ss;
  write_checkpoint(ss, out);
  CHECK(ss.str().rfind("IR3DNN1\n", 0) == 0);
  const auto loaded = read_checkpoint(ss);
  REQUIRE(loaded.size() == 2);
  Param a2("enc.w", Tensor({2, 3, 1, 1})), b2("enc.b", Tensor({2}));
  std::vector<Param*> dst{&a2, &b2};
  assign_checkpoint(dst, loaded);
  CHECK(a2.value.values() == a.value.values());
  CHECK(b2.value.values() == b.value.values());
  Param wrong("enc.w", Tensor({3, 2, 1, 1}));
  std::vector<Param*> bad{&wrong};
  CHECK_THROWS(assign_checkpoint(bad, loaded));
  std::stringstream garbage("NOTACKPT");
  CHECK_THROWS_AS(read_checkpoint(garbage), IoError);
}
