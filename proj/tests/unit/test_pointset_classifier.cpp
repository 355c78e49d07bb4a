#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "generators.hpp"
#include "iris3d/error.hpp"
#include "iris3d/nn.hpp"
#include "iris3d/pointset_classifier.hpp"
#include "oracles.hpp"

using namespace iris3d;
using iris3d::testing::Gen;

namespace {

psn::PsnConfig small_config() {
  psn::PsnConfig c;
  c.point_widths = {8, 16, 32};
  c.global_widths = {32, 16, 2};
  return c;
}

sectors::SectorSample random_sample(Gen& g, std::size_t rows, int label = -1) {
  sectors::SectorSample s;
  s.label = label;
  for (std::size_t i = 0; i < rows * sectors::kChannels; ++i) s.points.push_back(g.normal());
  return s;
}

// Label is the sign of the mean-curvature channel, which is shifted by +-0.5.
std::vector<sectors::SectorSample> separable_set(Gen& g, std::size_t count, std::size_t rows) {
  std::vector<sectors::SectorSample> out;
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    auto s = random_sample(g, rows, label);
    for (std::size_t r = 0; r < rows; ++r) s.points[r * sectors::kChannels + 6] = 0.2 * s.at(r, 6) + (label ? 0.5 : -0.5);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("logits do not depend on point order") {
  Gen g(70);
  psn::PointSetNet net(small_config());
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_sample(g, 64);
    auto shuffled = s;
    std::vector<std::size_t> perm(s.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.engine());
    for (std::size_t r = 0; r < perm.size(); ++r)
      std::copy_n(s.points.begin() + static_cast<long>(perm[r] * sectors::kChannels), sectors::kChannels,
                  shuffled.points.begin() + static_cast<long>(r * sectors::kChannels));
    const auto a = net.forward(s), b = net.forward(shuffled);
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
  }
}

TEST_CASE("masked pooling equals pooling over the valid rows") {
  Gen g(71);
  psn::PointSetNet net(small_config());
  const std::size_t n = 20;
  const auto base = random_sample(g, n);
  auto padded = base;
  for (std::size_t i = 0; i < 12 * sectors::kChannels; ++i) padded.points.push_back(50.0 * g.normal());
  auto replicated = base;
  for (std::size_t r = 0; r < 12; ++r) {
    const std::size_t src = g.index(n);
    for (std::size_t c = 0; c < sectors::kChannels; ++c) replicated.points.push_back(base.at(src, c));
  }
  const auto ref = net.global_feature(psn::sample_tensor(base), n);
  const auto masked = net.global_feature(psn::sample_tensor(padded), n);
  const auto rep = net.global_feature(psn::sample_tensor(replicated), replicated.rows());
  REQUIRE(ref.size() == 32);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(masked[i] == ref[i]);
    CHECK(rep[i] == ref[i]);
  }
  CHECK_THROWS_AS(net.global_feature(psn::sample_tensor(base), n + 1), InvariantError);
}

TEST_CASE("classifier gradient matches finite differences") {
  Gen g(72);
  psn::PointSetNet net(small_config());
  const auto s = random_sample(g, 24);
  const auto x = psn::sample_tensor(s);
  auto params = net.params();
  nn::zero_grads(params);
  net.backward(nn::softmax_ce(net.forward(x), 1).dlogits);
  const auto loss = [&] { return nn::softmax_ce(net.forward(x), 1).loss; };
  const auto gc = iris3d::testing::check_gradients(params, loss, 50, 3);
  CHECK(gc.checked == 50);
  CHECK(gc.max_rel_error < 1e-4);
}

TEST_CASE("separable toy set is learned") {
  Gen g(73);
  auto cfg = small_config();
  cfg.epochs = 30;
  cfg.seed = 5;
  const auto train = separable_set(g, 64, 32);
  const auto valid = separable_set(g, 32, 32);
  psn::PointSetNet net(cfg);
  const auto rep = psn::psn_train(net, train, valid);
  CHECK(rep.epoch_loss.size() == 30);
  CHECK(rep.epoch_loss.back() < rep.epoch_loss.front());
  CHECK(rep.valid.acc == 1.0);
  REQUIRE(rep.valid.auc);
  CHECK(*rep.valid.auc == 1.0);
}

TEST_CASE("training is deterministic for a fixed seed") {
  Gen g(74);
  auto cfg = small_config();
  cfg.epochs = 3;
  const auto train = separable_set(g, 16, 16);
  psn::PointSetNet a(cfg), b(cfg);
  const auto ra = psn::psn_train(a, train, train);
  const auto rb = psn::psn_train(b, train, train);
  CHECK(ra.epoch_loss == rb.epoch_loss);
  CHECK(psn::psn_scores(a, train) == psn::psn_scores(b, train));
}

TEST_CASE("bad inputs are rejected") {
  Gen g(75);
  psn::PointSetNet net(small_config());
  std::vector<sectors::SectorSample> one_class;
  for (int i = 0; i < 4; ++i) one_class.push_back(random_sample(g, 8, 1));
  CHECK_THROWS_AS(psn::psn_train(net, one_class, {}), InvariantError);
  auto unlabelled = one_class;
  unlabelled.push_back(random_sample(g, 8, 0));
  unlabelled.push_back(random_sample(g, 8, -1));
  CHECK_THROWS_AS(psn::psn_train(net, unlabelled, {}), InvariantError);
  CHECK_THROWS_AS(net.forward(nn::Tensor({7, 8, 1})), ShapeError);
  auto cfg = small_config();
  cfg.point_widths[0] = 6;
  CHECK_THROWS_AS(cfg.validate(), InvariantError);
  cfg = small_config();
  cfg.global_widths[2] = 3;
  CHECK_THROWS_AS(cfg.validate(), InvariantError);
}
