#include "iris3d/nn.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "iris3d/error.hpp"

namespace iris3d::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank)
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     shape_str(t.shape()));
}

std::size_t out_extent(std::size_t in, std::size_t k, int stride, int pad, const char* axis) {
  const long padded = static_cast<long>(in) + 2L * pad;
  if (static_cast<long>(k) > padded)
    throw ShapeError(std::string("conv2d: kernel larger than padded ") + axis + " extent");
  const long span = padded - static_cast<long>(k);
  if (span % stride != 0)
    throw ShapeError(std::string("conv2d: ") + axis + " extent " + std::to_string(in) + " with pad " +
                     std::to_string(pad) + " is not divisible by stride " + std::to_string(stride));
  return static_cast<std::size_t>(span / stride + 1);
}

struct ConvGeom {
  std::size_t cin, h, w, cout, kh, kw, oh, ow;
  bool pointwise;  // 1x1, stride 1, no padding: the input is its own column matrix
};

ConvGeom conv_geom(const Tensor& x, const Tensor& w, int stride, int pad) {
  require_rank(x, 3, "conv2d input");
  require_rank(w, 4, "conv2d weight");
  if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
  if (pad < 0) throw ShapeError("conv2d: negative padding");
  if (w.dim(1) != x.dim(0))
    throw ShapeError("conv2d: weight " + shape_str(w.shape()) + " expects " + std::to_string(w.dim(1)) +
                     " input channels, input is " + shape_str(x.shape()));
  ConvGeom g{};
  g.cin = x.dim(0);
  g.h = x.dim(1);
  g.w = x.dim(2);
  g.cout = w.dim(0);
  g.kh = w.dim(2);
  g.kw = w.dim(3);
  g.oh = out_extent(g.h, g.kh, stride, pad, "height");
  g.ow = out_extent(g.w, g.kw, stride, pad, "width");
  g.pointwise = g.kh == 1 && g.kw == 1 && stride == 1 && pad == 0;
  return g;
}

std::vector<double> im2col(const Tensor& x, const ConvGeom& g, int stride, int pad) {
  const std::size_t k = g.cin * g.kh * g.kw;
  const std::size_t p = g.oh * g.ow;
  std::vector<double> col(k * p, 0.0);
  const auto* xd = x.data().data();
  for (std::size_t c = 0; c < g.cin; ++c)
    for (std::size_t ky = 0; ky < g.kh; ++ky)
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        double* row = col.data() + ((c * g.kh + ky) * g.kw + kx) * p;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const long iy = static_cast<long>(oy) * stride + static_cast<long>(ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
          const double* src = xd + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          double* dst = row + oy * g.ow;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const long ix = static_cast<long>(ox) * stride + static_cast<long>(kx) - pad;
            if (ix >= 0 && ix < static_cast<long>(g.w)) dst[ox] = src[ix];
          }
        }
      }
  return col;
}

void col2im(std::span<const double> col, const ConvGeom& g, int stride, int pad, Tensor& dx) {
  const std::size_t p = g.oh * g.ow;
  auto* xd = dx.data().data();
  for (std::size_t c = 0; c < g.cin; ++c)
    for (std::size_t ky = 0; ky < g.kh; ++ky)
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const double* row = col.data() + ((c * g.kh + ky) * g.kw + kx) * p;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const long iy = static_cast<long>(oy) * stride + static_cast<long>(ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
          double* dst = xd + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          const double* src = row + oy * g.ow;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const long ix = static_cast<long>(ox) * stride + static_cast<long>(kx) - pad;
            if (ix >= 0 && ix < static_cast<long>(g.w)) dst[ix] += src[ox];
          }
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const ConvGeom g = conv_geom(x, w, stride, pad);
  require_shape(b, {g.cout}, "conv2d bias");
  const std::size_t k = g.cin * g.kh * g.kw;
  const std::size_t p = g.oh * g.ow;

  std::vector<double> colbuf;
  const double* colp = x.data().data();
  if (!g.pointwise) {
    colbuf = im2col(x, g, stride, pad);
    colp = colbuf.data();
  }
  Tensor y({g.cout, g.oh, g.ow});
  MutMap ym(y.data().data(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(p));
  ym.noalias() = ConstMap(w.data().data(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(k)) *
                 ConstMap(colp, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
  for (std::size_t o = 0; o < g.cout; ++o) ym.row(static_cast<Eigen::Index>(o)).array() += b[o];
  return y;
}

Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, int stride, int pad) {
  const ConvGeom g = conv_geom(x, w, stride, pad);
  require_shape(dy, {g.cout, g.oh, g.ow}, "conv2d upstream gradient");
  const auto k = static_cast<Eigen::Index>(g.cin * g.kh * g.kw);
  const auto p = static_cast<Eigen::Index>(g.oh * g.ow);
  const auto co = static_cast<Eigen::Index>(g.cout);

  std::vector<double> colbuf;
  const double* colp = x.data().data();
  if (!g.pointwise) {
    colbuf = im2col(x, g, stride, pad);
    colp = colbuf.data();
  }
  ConstMap dym(dy.data().data(), co, p);
  ConstMap colm(colp, k, p);
  ConstMap wm(w.data().data(), co, k);

  Conv2dGrads grads{Tensor(x.shape()), Tensor(w.shape()), Tensor({g.cout})};
  MutMap(grads.dw.data().data(), co, k).noalias() = dym * colm.transpose();
  for (Eigen::Index o = 0; o < co; ++o) grads.db[static_cast<std::size_t>(o)] = dym.row(o).sum();

  if (g.pointwise) {
    MutMap(grads.dx.data().data(), k, p).noalias() = wm.transpose() * dym;
  } else {
    std::vector<double> dcol(static_cast<std::size_t>(k * p));
    MutMap(dcol.data(), k, p).noalias() = wm.transpose() * dym;
    col2im(dcol, g, stride, pad, grads.dx);
  }
  return grads;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  require_shape(dy, x.shape(), "relu upstream gradient");
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

PoolResult maxpool2x2(const Tensor& x) {
  require_rank(x, 3, "maxpool2x2 input");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 || w % 2) throw ShapeError("maxpool2x2: odd spatial extent in " + shape_str(x.shape()));
  const std::size_t oh = h / 2, ow = w / 2;
  PoolResult r{Tensor({c, oh, ow}), std::vector<std::size_t>(c * oh * ow)};
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        std::size_t best = (ch * h + 2 * i) * w + 2 * j;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (ch * h + 2 * i + dy) * w + 2 * j + dx;
            if (x[idx] > x[best]) best = idx;
          }
        const std::size_t o = (ch * oh + i) * ow + j;
        r.y[o] = x[best];
        r.argmax[o] = best;
      }
  return r;
}

PoolResult global_maxpool(const Tensor& x) {
  require_rank(x, 3, "global_maxpool input");
  const std::size_t c = x.dim(0), n = x.dim(1) * x.dim(2);
  PoolResult r{Tensor({c, 1, 1}), std::vector<std::size_t>(c)};
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::size_t best = ch * n;
    for (std::size_t i = 1; i < n; ++i)
      if (x[ch * n + i] > x[best]) best = ch * n + i;
    r.y[ch] = x[best];
    r.argmax[ch] = best;
  }
  return r;
}

Tensor pool_backward(const Shape& x_shape, std::span<const std::size_t> argmax, const Tensor& dy) {
  if (argmax.size() != dy.size()) throw ShapeError("pool backward: argmax/gradient size mismatch");
  Tensor dx(x_shape);
  for (std::size_t o = 0; o < dy.size(); ++o) dx[argmax[o]] += dy[o];
  return dx;
}

namespace {

struct Tap {
  std::size_t i0, i1;
  double w0, w1;
};

std::vector<Tap> bilinear_taps(std::size_t in) {
  std::vector<Tap> taps(2 * in);
  for (std::size_t o = 0; o < 2 * in; ++o) {
    double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
    if (src < 0.0) src = 0.0;
    auto i0 = static_cast<std::size_t>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    const double frac = src - static_cast<double>(i0);
    taps[o] = {i0, i1, 1.0 - frac, frac};
  }
  return taps;
}

}  // namespace

Tensor upsample_bilinear2x(const Tensor& x) {
  require_rank(x, 3, "upsample input");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const auto ty = bilinear_taps(h);
  const auto tx = bilinear_taps(w);
  Tensor y({c, 2 * h, 2 * w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < 2 * h; ++oy) {
      const Tap& a = ty[oy];
      for (std::size_t ox = 0; ox < 2 * w; ++ox) {
        const Tap& b = tx[ox];
        y.at(ch, oy, ox) = a.w0 * (b.w0 * x.at(ch, a.i0, b.i0) + b.w1 * x.at(ch, a.i0, b.i1)) +
                           a.w1 * (b.w0 * x.at(ch, a.i1, b.i0) + b.w1 * x.at(ch, a.i1, b.i1));
      }
    }
  return y;
}

Tensor upsample_bilinear2x_backward(const Tensor& dy) {
  require_rank(dy, 3, "upsample gradient");
  if (dy.dim(1) % 2 || dy.dim(2) % 2) throw ShapeError("upsample gradient: odd extent");
  const std::size_t c = dy.dim(0), h = dy.dim(1) / 2, w = dy.dim(2) / 2;
  const auto ty = bilinear_taps(h);
  const auto tx = bilinear_taps(w);
  Tensor dx({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < 2 * h; ++oy) {
      const Tap& a = ty[oy];
      for (std::size_t ox = 0; ox < 2 * w; ++ox) {
        const Tap& b = tx[ox];
        const double g = dy.at(ch, oy, ox);
        dx.at(ch, a.i0, b.i0) += a.w0 * b.w0 * g;
        dx.at(ch, a.i0, b.i1) += a.w0 * b.w1 * g;
        dx.at(ch, a.i1, b.i0) += a.w1 * b.w0 * g;
        dx.at(ch, a.i1, b.i1) += a.w1 * b.w1 * g;
      }
    }
  return dx;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  std::size_t channels = 0;
  for (const auto& p : parts) {
    require_rank(p, 3, "concat_channels input");
    if (p.dim(1) != parts[0].dim(1) || p.dim(2) != parts[0].dim(2))
      throw ShapeError("concat_channels: spatial mismatch " + shape_str(p.shape()) + " vs " +
                       shape_str(parts[0].shape()));
    channels += p.dim(0);
  }
  std::vector<double> data;
  data.reserve(channels * parts[0].dim(1) * parts[0].dim(2));
  for (const auto& p : parts) data.insert(data.end(), p.values().begin(), p.values().end());
  return Tensor({channels, parts[0].dim(1), parts[0].dim(2)}, std::move(data));
}

std::vector<Tensor> split_channels(const Tensor& dy, std::span<const std::size_t> channels) {
  require_rank(dy, 3, "split_channels input");
  std::size_t total = 0;
  for (auto c : channels) total += c;
  if (total != dy.dim(0))
    throw ShapeError("split_channels: channel counts sum to " + std::to_string(total) + ", tensor has " +
                     std::to_string(dy.dim(0)));
  const std::size_t plane = dy.dim(1) * dy.dim(2);
  std::vector<Tensor> out;
  std::size_t offset = 0;
  for (auto c : channels) {
    std::vector<double> d(dy.values().begin() + static_cast<long>(offset * plane),
                          dy.values().begin() + static_cast<long>((offset + c) * plane));
    out.emplace_back(Shape{c, dy.dim(1), dy.dim(2)}, std::move(d));
    offset += c;
  }
  return out;
}

LossGrad softmax_ce(const Tensor& logits, int label) {
  const std::size_t n = logits.size();
  if (label < 0 || static_cast<std::size_t>(label) >= n)
    throw ShapeError("softmax_ce: label " + std::to_string(label) + " outside " + std::to_string(n) + " classes");
  const double m = *std::max_element(logits.values().begin(), logits.values().end());
  double z = 0.0;
  for (double v : logits.values()) z += std::exp(v - m);
  LossGrad r{m + std::log(z) - logits[static_cast<std::size_t>(label)], Tensor(logits.shape())};
  for (std::size_t i = 0; i < n; ++i) r.dlogits[i] = std::exp(logits[i] - m) / z;
  r.dlogits[static_cast<std::size_t>(label)] -= 1.0;
  return r;
}

LossGrad softmax_ce_map(const Tensor& logits, std::span<const int> labels) {
  require_rank(logits, 3, "softmax_ce_map logits");
  const std::size_t c = logits.dim(0), p = logits.dim(1) * logits.dim(2);
  if (labels.size() != p) throw ShapeError("softmax_ce_map: label map size mismatch");
  LossGrad r{0.0, Tensor(logits.shape())};
  const double inv = 1.0 / static_cast<double>(p);
  for (std::size_t i = 0; i < p; ++i) {
    const int lab = labels[i];
    if (lab < 0 || static_cast<std::size_t>(lab) >= c) throw ShapeError("softmax_ce_map: label out of range");
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c; ++k) m = std::max(m, logits[k * p + i]);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(logits[k * p + i] - m);
    r.loss += (m + std::log(z) - logits[static_cast<std::size_t>(lab) * p + i]) * inv;
    for (std::size_t k = 0; k < c; ++k) r.dlogits[k * p + i] = std::exp(logits[k * p + i] - m) / z * inv;
    r.dlogits[static_cast<std::size_t>(lab) * p + i] -= inv;
  }
  return r;
}

// ---------------------------------------------------------------------------

Conv2d::Conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel, int s, int p)
    : weight(name + ".weight", Tensor({out_ch, in_ch, kernel, kernel})),
      bias(name + ".bias", Tensor({out_ch})),
      stride(s),
      pad(p) {}

void Conv2d::init_he(std::mt19937_64& rng) {
  const auto fan_in = static_cast<double>(weight.value.dim(1) * weight.value.dim(2) * weight.value.dim(3));
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (auto& v : weight.value.data()) v = dist(rng);
  bias.value.fill(0.0);
}

Tensor Conv2d::forward(const Tensor& x) {
  input_ = x;
  return conv2d(x, weight.value, bias.value, stride, pad);
}

Tensor Conv2d::backward(const Tensor& dy) {
  if (!input_) throw InvariantError("conv2d backward called before forward (" + weight.name + ")");
  auto g = conv2d_backward(*input_, weight.value, dy, stride, pad);
  for (std::size_t i = 0; i < g.dw.size(); ++i) weight.grad[i] += g.dw[i];
  for (std::size_t i = 0; i < g.db.size(); ++i) bias.grad[i] += g.db[i];
  return std::move(g.dx);
}

Tensor ReLU::forward(const Tensor& x) {
  input_ = x;
  return relu(x);
}

Tensor ReLU::backward(const Tensor& dy) {
  if (!input_) throw InvariantError("relu backward called before forward");
  return relu_backward(*input_, dy);
}

Tensor MaxPool2x2::forward(const Tensor& x) {
  auto r = maxpool2x2(x);
  in_shape_ = x.shape();
  argmax_ = std::move(r.argmax);
  return std::move(r.y);
}

Tensor MaxPool2x2::backward(const Tensor& dy) {
  if (!in_shape_) throw InvariantError("maxpool backward called before forward");
  return pool_backward(*in_shape_, argmax_, dy);
}

Tensor GlobalMaxPool::forward(const Tensor& x) {
  auto r = global_maxpool(x);
  in_shape_ = x.shape();
  argmax_ = std::move(r.argmax);
  return std::move(r.y);
}

Tensor GlobalMaxPool::backward(const Tensor& dy) {
  if (!in_shape_) throw InvariantError("global maxpool backward called before forward");
  return pool_backward(*in_shape_, argmax_, dy);
}

void Sgd::step(std::span<Param* const> params) {
  if (velocity_.empty())
    for (const Param* p : params) velocity_.emplace_back(p->value.shape());
  if (velocity_.size() != params.size()) throw InvariantError("sgd: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    Tensor& v = velocity_[i];
    require_shape(v, p.value.shape(), "sgd velocity");
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = momentum_ * v[j] - lr_ * p.grad[j];
      p.value[j] += v[j];
    }
  }
}

void zero_grads(std::span<Param* const> params) {
  for (Param* p : params) p->zero_grad();
}

}  // namespace iris3d::nn
