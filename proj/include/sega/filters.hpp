#pragma once

#include "sega/tensor.hpp"

namespace sega {

// Small spatial helpers shared by the scorers and the perceptual maps.
// All operate on single-channel H x W x 1 planes with edge replication at
// the borders; each forward op has an exactly matching adjoint scatter so
// analytic gradients line up with finite differences.

inline int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

/// Extract channel c as an H x W x 1 plane.
Tensor channel_plane(const Tensor& t, int c);

/// BT.601 luma (0.299, 0.587, 0.114) as an H x W x 1 plane; single-channel
/// input is passed through.
Tensor luma(const Image& img);

/// 3x3 correlation with edge replication. k is row-major, k[1][1] the center.
Tensor correlate3(const Tensor& plane, const double k[9]);

/// Adjoint of correlate3: scatters coeff(p) * k back onto the (replicated)
/// source pixels. Accumulates into out, which must match plane shape.
void correlate3_adjoint(const Tensor& coeff, const double k[9], Tensor& out);

/// Box mean over a (2r+1)^2 window with edge replication.
Tensor box_mean(const Tensor& plane, int radius);

/// Sobel derivative kernels scaled by 1/8 so responses stay in intensity
/// units per pixel step.
extern const double kSobelX[9];
extern const double kSobelY[9];

}  // namespace sega
