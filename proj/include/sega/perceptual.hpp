#pragma once

#include "sega/tensor.hpp"

namespace sega {

/// Pixel-domain JND constants. Luminance adaptation runs on the 0-255 luma
/// scale: T0*(1 - sqrt(b/127)) + gamma below b = 127, slope*(b - 127) + gamma
/// above. Texture masking is gain * local mean gradient magnitude; the two
/// combine with a NAMM-style overlap subtraction.
struct JndParams {
  double t0 = 17.0;
  double gamma = 3.0;
  double slope = 3.0 / 128.0;
  double texture_gain = 0.117;
  double overlap = 0.3;  // in [0,1)
  int window = 5;        // odd local window for background luma / masking
};

void validate(const JndParams& p);

/// Per-pixel perturbation tolerance as an H x W x 1 map on the [0,1] scale.
/// JND = LA + TM - overlap * min(LA, TM), computed on 0-255 luma then
/// rescaled; borders use edge replication.
Tensor jnd_map(const Image& x, const JndParams& params = {});

/// Mean local SSIM on luma, 11x11 Gaussian window (stddev 1.5), standard
/// constants C1 = (0.01 R)^2, C2 = (0.03 R)^2 with R = 1 on the [0,1] scale.
/// Statistics use valid windows only, so inputs must be at least 11x11.
double ssim(const Image& x, const Image& y);

/// Distances between an image and its adversarial counterpart. linf and l1
/// are reported on the 0-255 scale (l1 as per-pixel mean absolute value),
/// l2 as per-element RMS on [0,1].
struct PerceptualReport {
  double linf = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double ssim = 1.0;

  /// Integer display convention for the l-infinity column.
  long display_linf() const;
};

PerceptualReport perceptual_report(const Image& x, const Image& x_adv);

}  // namespace sega
