#pragma once

#include "iris3d/tensor.hpp"

namespace iris3d::dwt {

// One level of the unnormalised 2D Haar transform, applied per channel.
// Each band is [C,H/2,W/2].
struct SubbandSet {
  nn::Tensor ll, lh, hl, hh;
};

// Haar analysis kernels, cross-correlation orientation, entries +-1:
//   LL = [ 1  1;  1  1]   LH = [-1 -1;  1  1]
//   HL = [-1  1; -1  1]   HH = [ 1 -1; -1  1]
// Returned as a [4,1,2,2] weight tensor in LL, LH, HL, HH order.
nn::Tensor haar_kernels();

// Stride-2 correlation of every channel with the four kernels.
// Throws ShapeError for odd extents; callers pad explicitly.
SubbandSet dwt_forward(const nn::Tensor& x);

// Exact synthesis: the analysis rows are orthogonal with squared norm 4, so
// the inverse is the transpose scaled by 1/4.
nn::Tensor dwt_inverse(const SubbandSet& s);

// Gradient of dwt_forward w.r.t. its input given band gradients.
nn::Tensor dwt_backward(const SubbandSet& grad);

}  // namespace iris3d::dwt
