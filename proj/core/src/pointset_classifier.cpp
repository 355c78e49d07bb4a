#include "iris3d/pointset_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "iris3d/error.hpp"

namespace iris3d::psn {

void PsnConfig::validate() const {
  if (point_widths[0] != sectors::kChannels)
    throw InvariantError("psn config: first width must equal the " + std::to_string(sectors::kChannels) +
                         " sample channels");
  if (global_widths[0] != point_widths[2]) throw InvariantError("psn config: head input must match pooled width");
  if (global_widths[2] != 2) throw InvariantError("psn config: last width must be 2 classes");
  for (auto w : point_widths)
    if (w == 0) throw InvariantError("psn config: zero width");
  for (auto w : global_widths)
    if (w == 0) throw InvariantError("psn config: zero width");
  if (batch == 0) throw InvariantError("psn config: batch size must be positive");
}

PointSetNet::PointSetNet(PsnConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto& pw = cfg_.point_widths;
  const auto& gw = cfg_.global_widths;
  p1_ = nn::Conv2d("point1", pw[0], pw[1], 1, 1, 0);
  p2_ = nn::Conv2d("point2", pw[1], pw[2], 1, 1, 0);
  g1_ = nn::Conv2d("head1", gw[0], gw[1], 1, 1, 0);
  g2_ = nn::Conv2d("head2", gw[1], gw[2], 1, 1, 0);
  std::mt19937_64 rng(cfg_.seed);
  for (auto* c : {&p1_, &p2_, &g1_, &g2_}) c->init_he(rng);
}

nn::Tensor sample_tensor(const sectors::SectorSample& sample) {
  const std::size_t n = sample.rows();
  if (n == 0 || sample.points.size() != n * sectors::kChannels)
    throw ShapeError("psn: sample must be N x " + std::to_string(sectors::kChannels));
  std::vector<double> v(sample.points.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < sectors::kChannels; ++c) v[c * n + r] = sample.at(r, c);
  return nn::Tensor({sectors::kChannels, n, 1}, std::move(v));
}

nn::Tensor PointSetNet::point_features(const nn::Tensor& points) {
  if (points.shape().size() != 3 || points.shape()[0] != cfg_.point_widths[0] || points.shape()[2] != 1)
    throw ShapeError("psn: expected [" + std::to_string(cfg_.point_widths[0]) + ",N,1] input, got " +
                     nn::shape_str(points.shape()));
  return pr2_.forward(p2_.forward(pr1_.forward(p1_.forward(points))));
}

nn::Tensor PointSetNet::forward(const nn::Tensor& points) {
  const nn::Tensor pooled = pool_.forward(point_features(points));
  ran_forward_ = true;
  return g2_.forward(gr1_.forward(g1_.forward(pooled)));
}

nn::Tensor PointSetNet::forward(const sectors::SectorSample& sample) { return forward(sample_tensor(sample)); }

void PointSetNet::backward(const nn::Tensor& dlogits) {
  if (!ran_forward_) throw InvariantError("psn: backward without forward");
  nn::Tensor d = g1_.backward(gr1_.backward(g2_.backward(dlogits)));
  d = pool_.backward(d);
  p1_.backward(pr1_.backward(p2_.backward(pr2_.backward(d))));
}

nn::Tensor PointSetNet::global_feature(const nn::Tensor& points, std::size_t valid_rows) {
  const nn::Tensor f = point_features(points);
  const std::size_t c = f.shape()[0], n = f.shape()[1];
  if (valid_rows == 0 || valid_rows > n) throw InvariantError("psn: valid row count out of range");
  std::vector<double> out(c);
  const auto data = f.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    out[ch] = *std::max_element(data.begin() + static_cast<std::ptrdiff_t>(ch * n),
                                data.begin() + static_cast<std::ptrdiff_t>(ch * n + valid_rows));
  return nn::Tensor({c, 1, 1}, std::move(out));
}

double PointSetNet::probability(const sectors::SectorSample& sample) {
  const nn::Tensor logits = forward(sample);
  const auto z = logits.data();
  return 1.0 / (1.0 + std::exp(z[0] - z[1]));
}

std::vector<nn::Param*> PointSetNet::params() {
  return {&p1_.weight, &p1_.bias, &p2_.weight, &p2_.bias, &g1_.weight, &g1_.bias, &g2_.weight, &g2_.bias};
}

std::vector<int> sample_labels(const std::vector<sectors::SectorSample>& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.label);
  return out;
}

std::vector<double> psn_scores(PointSetNet& net, const std::vector<sectors::SectorSample>& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(net.probability(s));
  return out;
}

PsnReport psn_train(PointSetNet& net, const std::vector<sectors::SectorSample>& train,
                    const std::vector<sectors::SectorSample>& valid) {
  const PsnConfig& cfg = net.config();
  bool seen[2] = {false, false};
  for (const auto& s : train) {
    if (s.label != 0 && s.label != 1) throw InvariantError("psn train: every training sample needs a 0/1 label");
    seen[s.label] = true;
  }
  if (!seen[0] || !seen[1]) throw InvariantError("psn train: training set must contain both classes");

  std::vector<nn::Tensor> inputs;
  inputs.reserve(train.size());
  for (const auto& s : train) inputs.push_back(sample_tensor(s));

  const auto params = net.params();
  nn::Sgd sgd(cfg.lr, cfg.momentum);
  std::mt19937_64 rng(cfg.seed ^ 0xC0FFEEULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  PsnReport report;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      nn::zero_grads(params);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const auto lg = nn::softmax_ce(net.forward(inputs[i]), train[i].label);
        total += lg.loss;
        nn::Tensor d = lg.dlogits;
        for (auto& v : d.data()) v *= inv;
        net.backward(d);
      }
      sgd.step(params);
    }
    report.epoch_loss.push_back(total / static_cast<double>(train.size()));
  }
  if (!valid.empty()) report.valid = metrics::classification_metrics(psn_scores(net, valid), sample_labels(valid));
  return report;
}

}  // namespace iris3d::psn
