#include "iris3d/dwt.hpp"

#include "iris3d/error.hpp"

namespace iris3d::dwt {

using nn::Shape;
using nn::Tensor;

Tensor haar_kernels() {
  return Tensor({4, 1, 2, 2}, {1, 1, 1, 1,      //
                               -1, -1, 1, 1,    //
                               -1, 1, -1, 1,    //
                               1, -1, -1, 1});
}

SubbandSet dwt_forward(const Tensor& x) {
  if (x.rank() != 3) throw ShapeError("dwt_forward: expected [C,H,W], got " + nn::shape_str(x.shape()));
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 || w % 2) throw ShapeError("dwt_forward: odd spatial extent " + nn::shape_str(x.shape()));
  const Shape band{c, h / 2, w / 2};
  SubbandSet s{Tensor(band), Tensor(band), Tensor(band), Tensor(band)};
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h / 2; ++i)
      for (std::size_t j = 0; j < w / 2; ++j) {
        const double a = x.at(ch, 2 * i, 2 * j);
        const double b = x.at(ch, 2 * i, 2 * j + 1);
        const double cc = x.at(ch, 2 * i + 1, 2 * j);
        const double d = x.at(ch, 2 * i + 1, 2 * j + 1);
        s.ll.at(ch, i, j) = a + b + cc + d;
        s.lh.at(ch, i, j) = -a - b + cc + d;
        s.hl.at(ch, i, j) = -a + b - cc + d;
        s.hh.at(ch, i, j) = a - b - cc + d;
      }
  return s;
}

namespace {

Tensor synthesize(const SubbandSet& s, double scale) {
  const Shape& band = s.ll.shape();
  if (band.size() != 3 || s.lh.shape() != band || s.hl.shape() != band || s.hh.shape() != band)
    throw ShapeError("dwt: subband shapes differ (" + nn::shape_str(s.ll.shape()) + ", " +
                     nn::shape_str(s.lh.shape()) + ", " + nn::shape_str(s.hl.shape()) + ", " +
                     nn::shape_str(s.hh.shape()) + ")");
  const std::size_t c = band[0], h = band[1], w = band[2];
  Tensor x({c, 2 * h, 2 * w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double ll = s.ll.at(ch, i, j), lh = s.lh.at(ch, i, j);
        const double hl = s.hl.at(ch, i, j), hh = s.hh.at(ch, i, j);
        x.at(ch, 2 * i, 2 * j) = scale * (ll - lh - hl + hh);
        x.at(ch, 2 * i, 2 * j + 1) = scale * (ll - lh + hl - hh);
        x.at(ch, 2 * i + 1, 2 * j) = scale * (ll + lh - hl - hh);
        x.at(ch, 2 * i + 1, 2 * j + 1) = scale * (ll + lh + hl + hh);
      }
  return x;
}

}  // namespace

Tensor dwt_inverse(const SubbandSet& s) { return synthesize(s, 0.25); }

Tensor dwt_backward(const SubbandSet& grad) { return synthesize(grad, 1.0); }

}  // namespace iris3d::dwt
