#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "iris3d/image_io.hpp"
#include "iris3d/nn.hpp"

namespace iris3d::seg {

struct WrbNetConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  std::array<std::size_t, 4> widths{8, 16, 32, 64};
  std::size_t classes = 2;
  // Output channels of each per-subband 1x1 conv at the three skip levels.
  // Zero means widths[level] / 4.
  std::array<std::size_t, 3> band_channels{0, 0, 0};
  // false swaps every wavelet refinement block for a plain skip (ablation).
  bool use_wrb = true;

  std::size_t band(std::size_t level) const;
  // Throws InvariantError unless H,W are divisible by 8 and widths positive.
  void validate() const;
};

// Wavelet refinement block: Haar DWT of the encoder feature, a separate 1x1
// conv per subband, concatenated after the decoder feature:
//   [decoder, conv(LL), conv(LH), conv(HL), conv(HH)]
class WrbBlock {
 public:
  WrbBlock() = default;
  WrbBlock(const std::string& name, std::size_t enc_channels, std::size_t band_channels);

  void init(std::mt19937_64& rng);
  nn::Tensor forward(const nn::Tensor& encoder_feat, const nn::Tensor& decoder_feat);
  struct Grads {
    nn::Tensor encoder, decoder;
  };
  Grads backward(const nn::Tensor& dy);
  std::vector<nn::Param*> params();
  std::size_t out_channels(std::size_t decoder_channels) const { return decoder_channels + 4 * band_; }

  std::array<nn::Conv2d, 4> convs;  // LL, LH, HL, HH

 private:
  std::size_t band_ = 0;
  std::size_t decoder_channels_ = 0;
  bool ran_forward_ = false;
};

// Ablation stand-in with the same output shape: 2x2 max-pool of the encoder
// feature, one 1x1 conv to 4*band channels, concatenated after the decoder.
class PlainSkip {
 public:
  PlainSkip() = default;
  PlainSkip(const std::string& name, std::size_t enc_channels, std::size_t band_channels);

  void init(std::mt19937_64& rng);
  nn::Tensor forward(const nn::Tensor& encoder_feat, const nn::Tensor& decoder_feat);
  WrbBlock::Grads backward(const nn::Tensor& dy);
  std::vector<nn::Param*> params();

  nn::MaxPool2x2 pool;
  nn::Conv2d proj;

 private:
  std::size_t decoder_channels_ = 0;
};

// Two 3x3 conv + ReLU layers.
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(const std::string& name, std::size_t in, std::size_t out);
  void init(std::mt19937_64& rng);
  nn::Tensor forward(const nn::Tensor& x);
  nn::Tensor backward(const nn::Tensor& dy);
  std::vector<nn::Param*> params();

  nn::Conv2d c1, c2;

 private:
  nn::ReLU r1, r2;
};

// U-shaped network: four encoder blocks, three skip levels (wavelet refinement
// blocks by default), three decoder blocks, a full-resolution head.
class WrbNet {
 public:
  explicit WrbNet(WrbNetConfig cfg, std::uint64_t seed = 1);

  const WrbNetConfig& config() const { return cfg_; }
  // [1,H,W] -> [classes,H,W] logits.
  nn::Tensor forward(const nn::Tensor& image);
  // Gradient of the loss w.r.t. the logits of the last forward; accumulates
  // parameter gradients. Throws InvariantError without a prior forward.
  void backward(const nn::Tensor& dlogits);
  std::vector<nn::Param*> params();
  std::size_t parameter_count();

  SegMask predict(const nn::Tensor& image);

 private:
  nn::Tensor skip_forward(std::size_t level, const nn::Tensor& enc, const nn::Tensor& dec);
  WrbBlock::Grads skip_backward(std::size_t level, const nn::Tensor& dy);

  WrbNetConfig cfg_;
  std::array<ConvBlock, 4> enc_;
  std::array<nn::MaxPool2x2, 3> pool_;
  std::array<WrbBlock, 3> wrb_;
  std::array<PlainSkip, 3> plain_;
  std::array<ConvBlock, 3> dec_;  // index = skip level
  nn::Conv2d head_conv_;
  nn::ReLU head_relu_;
  nn::Conv2d classifier_;
  bool ran_forward_ = false;
};

struct SegExample {
  nn::Tensor image;  // [1,H,W]
  SegMask mask;
};

struct SegTrainOptions {
  std::size_t epochs = 30;
  double lr = 0.05;
  double momentum = 0.9;
  std::size_t batch = 4;
  std::uint64_t seed = 1;
  // Batch gradients whose global L2 norm exceeds this are rescaled to it
  // before the step; 0 disables clipping.
  double clip_norm = 1.0;
};

struct SegTrainReport {
  std::vector<double> epoch_loss;  // mean per-pixel cross entropy per epoch
};

// Throws InvariantError on an empty dataset or mismatched extents.
SegTrainReport segnet_train(WrbNet& net, const std::vector<SegExample>& data, const SegTrainOptions& opt);

std::vector<int> mask_labels(const SegMask& mask);

}  // namespace iris3d::seg
