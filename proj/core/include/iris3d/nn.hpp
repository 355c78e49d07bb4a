#pragma once

// Closed set of differentiable operations used by the segmentation network and
// the point-set classifier. Every forward op has a matching hand-written
// backward; composite models chain them explicitly.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "iris3d/tensor.hpp"

namespace iris3d::nn {

// ---------------------------------------------------------------------------
// Functional ops. Spatial tensors are [C,H,W].

// Cross-correlation. w is [C_out,C_in,kh,kw], b is [C_out].
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

struct Conv2dGrads {
  Tensor dx, dw, db;
};
Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, int stride, int pad);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dy);

struct PoolResult {
  Tensor y;
  std::vector<std::size_t> argmax;  // flat input index per output element
};
PoolResult maxpool2x2(const Tensor& x);
// Channel-wise max over all spatial positions: [C,H,W] -> [C,1,1].
PoolResult global_maxpool(const Tensor& x);
Tensor pool_backward(const Shape& x_shape, std::span<const std::size_t> argmax, const Tensor& dy);

// Half-pixel-centred bilinear interpolation with edge clamping.
Tensor upsample_bilinear2x(const Tensor& x);
Tensor upsample_bilinear2x_backward(const Tensor& dy);

Tensor concat_channels(std::span<const Tensor> parts);
std::vector<Tensor> split_channels(const Tensor& dy, std::span<const std::size_t> channels);

struct LossGrad {
  double loss = 0.0;
  Tensor dlogits;
};
// -log softmax(logits)[label] for a flat logit vector.
LossGrad softmax_ce(const Tensor& logits, int label);
// Pixel-wise cross entropy averaged over H*W; labels has H*W entries.
LossGrad softmax_ce_map(const Tensor& logits, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Stateful layers: keep the forward input so backward can run. Calling
// backward without a recorded forward throws InvariantError.

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel, int stride, int pad);

  void init_he(std::mt19937_64& rng);
  Tensor forward(const Tensor& x);
  // Accumulates into weight.grad / bias.grad, returns dL/dx.
  Tensor backward(const Tensor& dy);

  Param weight;
  Param bias;
  int stride = 1;
  int pad = 0;

 private:
  std::optional<Tensor> input_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  std::optional<Tensor> input_;
};

class MaxPool2x2 {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  std::optional<Shape> in_shape_;
  std::vector<std::size_t> argmax_;
};

class GlobalMaxPool {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  std::span<const std::size_t> argmax() const { return argmax_; }

 private:
  std::optional<Shape> in_shape_;
  std::vector<std::size_t> argmax_;
};

// SGD with classical momentum: v <- m*v - lr*g ; p <- p + v.
class Sgd {
 public:
  Sgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
  void step(std::span<Param* const> params);

 private:
  double lr_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

void zero_grads(std::span<Param* const> params);

}  // namespace iris3d::nn
