#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "iris3d/metrics.hpp"
#include "iris3d/nn.hpp"
#include "iris3d/sectors.hpp"

namespace iris3d::psn {

struct PsnConfig {
  std::array<std::size_t, 3> point_widths{8, 64, 128};
  std::array<std::size_t, 3> global_widths{128, 64, 2};
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 30;
  std::size_t batch = 16;
  std::uint64_t seed = 1;
  // Throws InvariantError unless the widths chain from 8 input channels to
  // 2 classes.
  void validate() const;
};

// Shared per-point MLP (1x1 convolutions over an [8, N, 1] tensor), channel
// max over the points, and a two-layer head. No transform sub-networks.
class PointSetNet {
 public:
  explicit PointSetNet(PsnConfig cfg = {});
  const PsnConfig& config() const { return cfg_; }

  // Returns logits [2,1,1]. Throws ShapeError if the sample does not have
  // the configured channel count.
  nn::Tensor forward(const sectors::SectorSample& sample);
  nn::Tensor forward(const nn::Tensor& points);  // [8, N, 1]
  void backward(const nn::Tensor& dlogits);

  // Pooled global feature using only the first `valid_rows` points, which is
  // what masking the remainder with -inf would give.
  nn::Tensor global_feature(const nn::Tensor& points, std::size_t valid_rows);

  double probability(const sectors::SectorSample& sample);  // softmax class 1
  std::vector<nn::Param*> params();

 private:
  nn::Tensor point_features(const nn::Tensor& points);

  PsnConfig cfg_;
  nn::Conv2d p1_, p2_, g1_, g2_;
  nn::ReLU pr1_, pr2_, gr1_;
  nn::GlobalMaxPool pool_;
  bool ran_forward_ = false;
};

// [8, N, 1] layout of a sample (channels first).
nn::Tensor sample_tensor(const sectors::SectorSample& sample);

struct PsnReport {
  std::vector<double> epoch_loss;
  metrics::ClassificationMetrics valid;
};

// Mini-batch SGD on mean cross entropy; samples are shuffled each epoch with
// the configured seed. Throws InvariantError unless the training set holds
// both classes (unlabelled samples are rejected too).
PsnReport psn_train(PointSetNet& net, const std::vector<sectors::SectorSample>& train,
                    const std::vector<sectors::SectorSample>& valid);

std::vector<double> psn_scores(PointSetNet& net, const std::vector<sectors::SectorSample>& data);
std::vector<int> sample_labels(const std::vector<sectors::SectorSample>& data);

}  // namespace iris3d::psn
