#include "iris3d/wrb_segnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iris3d/dwt.hpp"
#include "iris3d/error.hpp"

namespace iris3d::seg {

using nn::Tensor;

std::size_t WrbNetConfig::band(std::size_t level) const {
  const std::size_t b = band_channels.at(level);
  return b ? b : std::max<std::size_t>(1, widths.at(level) / 4);
}

void WrbNetConfig::validate() const {
  if (height == 0 || width == 0 || height % 8 || width % 8)
    throw InvariantError("wrb net: input extents " + std::to_string(height) + "x" + std::to_string(width) +
                         " must be positive multiples of 8");
  for (auto w : widths)
    if (w == 0) throw InvariantError("wrb net: channel widths must be positive");
  if (classes < 2) throw InvariantError("wrb net: need at least two classes");
}

namespace {

void require_half_resolution(const Tensor& enc, const Tensor& dec, const char* what) {
  if (enc.rank() != 3 || dec.rank() != 3 || enc.dim(1) != 2 * dec.dim(1) || enc.dim(2) != 2 * dec.dim(2))
    throw ShapeError(std::string(what) + ": decoder feature " + nn::shape_str(dec.shape()) +
                     " is not at half the resolution of encoder feature " + nn::shape_str(enc.shape()));
}

}  // namespace

// ---------------------------------------------------------------------------

WrbBlock::WrbBlock(const std::string& name, std::size_t enc_channels, std::size_t band_channels)
    : convs{nn::Conv2d(name + ".ll", enc_channels, band_channels, 1, 1, 0),
            nn::Conv2d(name + ".lh", enc_channels, band_channels, 1, 1, 0),
            nn::Conv2d(name + ".hl", enc_channels, band_channels, 1, 1, 0),
            nn::Conv2d(name + ".hh", enc_channels, band_channels, 1, 1, 0)},
      band_(band_channels) {}

void WrbBlock::init(std::mt19937_64& rng) {
  for (auto& c : convs) c.init_he(rng);
}

Tensor WrbBlock::forward(const Tensor& encoder_feat, const Tensor& decoder_feat) {
  require_half_resolution(encoder_feat, decoder_feat, "wrb_block");
  const auto bands = dwt::dwt_forward(encoder_feat);
  decoder_channels_ = decoder_feat.dim(0);
  const std::array<Tensor, 5> parts{decoder_feat, convs[0].forward(bands.ll), convs[1].forward(bands.lh),
                                    convs[2].forward(bands.hl), convs[3].forward(bands.hh)};
  ran_forward_ = true;
  return nn::concat_channels(parts);
}

WrbBlock::Grads WrbBlock::backward(const Tensor& dy) {
  if (!ran_forward_) throw InvariantError("wrb_block backward called before forward");
  const std::array<std::size_t, 5> split{decoder_channels_, band_, band_, band_, band_};
  auto g = nn::split_channels(dy, split);
  dwt::SubbandSet db{convs[0].backward(g[1]), convs[1].backward(g[2]), convs[2].backward(g[3]),
                     convs[3].backward(g[4])};
  return {dwt::dwt_backward(db), std::move(g[0])};
}

std::vector<nn::Param*> WrbBlock::params() {
  std::vector<nn::Param*> p;
  for (auto& c : convs) {
    p.push_back(&c.weight);
    p.push_back(&c.bias);
  }
  return p;
}

PlainSkip::PlainSkip(const std::string& name, std::size_t enc_channels, std::size_t band_channels)
    : proj(name + ".proj", enc_channels, 4 * band_channels, 1, 1, 0) {}

void PlainSkip::init(std::mt19937_64& rng) { proj.init_he(rng); }

Tensor PlainSkip::forward(const Tensor& encoder_feat, const Tensor& decoder_feat) {
  require_half_resolution(encoder_feat, decoder_feat, "plain skip");
  decoder_channels_ = decoder_feat.dim(0);
  const std::array<Tensor, 2> parts{decoder_feat, proj.forward(pool.forward(encoder_feat))};
  return nn::concat_channels(parts);
}

WrbBlock::Grads PlainSkip::backward(const Tensor& dy) {
  const std::array<std::size_t, 2> split{decoder_channels_, dy.dim(0) - decoder_channels_};
  auto g = nn::split_channels(dy, split);
  return {pool.backward(proj.backward(g[1])), std::move(g[0])};
}

std::vector<nn::Param*> PlainSkip::params() { return {&proj.weight, &proj.bias}; }

ConvBlock::ConvBlock(const std::string& name, std::size_t in, std::size_t out)
    : c1(name + ".conv1", in, out, 3, 1, 1), c2(name + ".conv2", out, out, 3, 1, 1) {}

void ConvBlock::init(std::mt19937_64& rng) {
  c1.init_he(rng);
  c2.init_he(rng);
}

Tensor ConvBlock::forward(const Tensor& x) { return r2.forward(c2.forward(r1.forward(c1.forward(x)))); }

Tensor ConvBlock::backward(const Tensor& dy) { return c1.backward(r1.backward(c2.backward(r2.backward(dy)))); }

std::vector<nn::Param*> ConvBlock::params() { return {&c1.weight, &c1.bias, &c2.weight, &c2.bias}; }

// ---------------------------------------------------------------------------

WrbNet::WrbNet(WrbNetConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const auto& w = cfg_.widths;
  enc_ = {ConvBlock("enc1", 1, w[0]), ConvBlock("enc2", w[0], w[1]), ConvBlock("enc3", w[1], w[2]),
          ConvBlock("enc4", w[2], w[3])};
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string name = "skip" + std::to_string(l + 1);
    wrb_[l] = WrbBlock(name, w[l], cfg_.band(l));
    plain_[l] = PlainSkip(name, w[l], cfg_.band(l));
  }
  // Decoder level l sees the skip output at the resolution of encoder l+1.
  dec_[2] = ConvBlock("dec3", w[3] + 4 * cfg_.band(2), w[2]);
  dec_[1] = ConvBlock("dec2", w[2] + 4 * cfg_.band(1), w[1]);
  dec_[0] = ConvBlock("dec1", w[1] + 4 * cfg_.band(0), w[0]);
  head_conv_ = nn::Conv2d("head", w[0], w[0], 3, 1, 1);
  classifier_ = nn::Conv2d("classifier", w[0], cfg_.classes, 1, 1, 0);

  std::mt19937_64 rng(seed);
  for (auto& e : enc_) e.init(rng);
  for (std::size_t l = 0; l < 3; ++l) cfg_.use_wrb ? wrb_[l].init(rng) : plain_[l].init(rng);
  for (auto& d : dec_) d.init(rng);
  head_conv_.init_he(rng);
  classifier_.init_he(rng);
}

Tensor WrbNet::skip_forward(std::size_t level, const Tensor& enc, const Tensor& dec) {
  return cfg_.use_wrb ? wrb_[level].forward(enc, dec) : plain_[level].forward(enc, dec);
}

WrbBlock::Grads WrbNet::skip_backward(std::size_t level, const Tensor& dy) {
  return cfg_.use_wrb ? wrb_[level].backward(dy) : plain_[level].backward(dy);
}

Tensor WrbNet::forward(const Tensor& image) {
  nn::require_shape(image, {1, cfg_.height, cfg_.width}, "wrb net input");
  std::array<Tensor, 4> e;
  e[0] = enc_[0].forward(image);
  for (std::size_t l = 1; l < 4; ++l) e[l] = enc_[l].forward(pool_[l - 1].forward(e[l - 1]));

  Tensor d = e[3];
  for (std::size_t l = 3; l-- > 0;) d = nn::upsample_bilinear2x(dec_[l].forward(skip_forward(l, e[l], d)));
  ran_forward_ = true;
  return classifier_.forward(head_relu_.forward(head_conv_.forward(d)));
}

void WrbNet::backward(const Tensor& dlogits) {
  if (!ran_forward_) throw InvariantError("wrb net backward called before forward");
  Tensor dd = head_conv_.backward(head_relu_.backward(classifier_.backward(dlogits)));

  std::array<Tensor, 4> de;
  for (std::size_t l = 0; l < 3; ++l) {
    auto g = skip_backward(l, dec_[l].backward(nn::upsample_bilinear2x_backward(dd)));
    de[l] = std::move(g.encoder);
    dd = std::move(g.decoder);
  }
  de[3] = std::move(dd);

  for (std::size_t l = 4; l-- > 1;) {
    Tensor dp = pool_[l - 1].backward(enc_[l].backward(de[l]));
    for (std::size_t i = 0; i < dp.size(); ++i) de[l - 1][i] += dp[i];
  }
  enc_[0].backward(de[0]);
}

std::vector<nn::Param*> WrbNet::params() {
  std::vector<nn::Param*> p;
  auto add = [&](std::vector<nn::Param*> v) { p.insert(p.end(), v.begin(), v.end()); };
  for (auto& e : enc_) add(e.params());
  for (std::size_t l = 0; l < 3; ++l) add(cfg_.use_wrb ? wrb_[l].params() : plain_[l].params());
  for (auto& d : dec_) add(d.params());
  add({&head_conv_.weight, &head_conv_.bias, &classifier_.weight, &classifier_.bias});
  return p;
}

std::size_t WrbNet::parameter_count() {
  std::size_t n = 0;
  for (auto* p : params()) n += p->value.size();
  return n;
}

SegMask WrbNet::predict(const Tensor& image) {
  const Tensor logits = forward(image);
  SegMask mask(cfg_.width, cfg_.height);
  const std::size_t plane = cfg_.width * cfg_.height;
  for (std::size_t i = 0; i < plane; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < cfg_.classes; ++k)
      if (logits[k * plane + i] > logits[best * plane + i]) best = k;
    mask.labels[i] = best == 1 ? 1 : 0;
  }
  return mask;
}

std::vector<int> mask_labels(const SegMask& mask) {
  std::vector<int> labels(mask.labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = mask.labels[i] ? 1 : 0;
  return labels;
}

SegTrainReport segnet_train(WrbNet& net, const std::vector<SegExample>& data, const SegTrainOptions& opt) {
  if (data.empty()) throw InvariantError("segnet_train: empty dataset");
  if (opt.batch == 0) throw InvariantError("segnet_train: batch size must be positive");
  const auto& cfg = net.config();
  std::vector<std::vector<int>> labels;
  for (const auto& ex : data) {
    nn::require_shape(ex.image, {1, cfg.height, cfg.width}, "segnet_train image");
    if (ex.mask.width != cfg.width || ex.mask.height != cfg.height)
      throw InvariantError("segnet_train: mask extents differ from the network input");
    labels.push_back(mask_labels(ex.mask));
  }

  auto params = net.params();
  nn::Sgd sgd(opt.lr, opt.momentum);
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  SegTrainReport report;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch) {
      const std::size_t end = std::min(order.size(), start + opt.batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      nn::zero_grads(params);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        auto lg = nn::softmax_ce_map(net.forward(data[i].image), labels[i]);
        total += lg.loss;
        for (auto& g : lg.dlogits.data()) g *= scale;
        net.backward(lg.dlogits);
      }
      if (opt.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto* p : params)
          for (double g : p->grad.data()) sq += g * g;
        if (const double norm = std::sqrt(sq); norm > opt.clip_norm)
          for (auto* p : params)
            for (auto& g : p->grad.data()) g *= opt.clip_norm / norm;
      }
      sgd.step(params);
    }
    report.epoch_loss.push_back(total / static_cast<double>(data.size()));
  }
  return report;
}

}  // namespace iris3d::seg
