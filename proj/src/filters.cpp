#include "sega/filters.hpp"

namespace sega {

const double kSobelX[9] = {-0.125, 0.0, 0.125, -0.25, 0.0, 0.25, -0.125, 0.0, 0.125};
const double kSobelY[9] = {-0.125, -0.25, -0.125, 0.0, 0.0, 0.0, 0.125, 0.25, 0.125};

Tensor channel_plane(const Tensor& t, int c) {
  Tensor out(t.height, t.width, 1);
  for (int y = 0; y < t.height; ++y)
    for (int x = 0; x < t.width; ++x) out.at(y, x, 0) = t.at(y, x, c);
  return out;
}

Tensor luma(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3)
    throw std::invalid_argument("luma: expected 1 or 3 channels");
  Tensor out(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(y, x, 0) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                        0.114 * img.at(y, x, 2);
  return out;
}

Tensor correlate3(const Tensor& plane, const double k[9]) {
  Tensor out(plane.height, plane.width, 1);
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          s += k[(dy + 1) * 3 + (dx + 1)] *
               plane.at(clamp_index(y + dy, plane.height), clamp_index(x + dx, plane.width), 0);
      out.at(y, x, 0) = s;
    }
  }
  return out;
}

void correlate3_adjoint(const Tensor& coeff, const double k[9], Tensor& out) {
  require_same_shape(coeff, out, "correlate3_adjoint");
  for (int y = 0; y < coeff.height; ++y) {
    for (int x = 0; x < coeff.width; ++x) {
      const double c = coeff.at(y, x, 0);
      if (c == 0.0) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          out.at(clamp_index(y + dy, coeff.height), clamp_index(x + dx, coeff.width), 0) +=
              c * k[(dy + 1) * 3 + (dx + 1)];
    }
  }
}

Tensor box_mean(const Tensor& plane, int radius) {
  if (radius < 0) throw std::invalid_argument("box_mean: negative radius");
  const int n = 2 * radius + 1;
  Tensor tmp(plane.height, plane.width, 1);
  // horizontal pass
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      double s = 0.0;
      for (int dx = -radius; dx <= radius; ++dx)
        s += plane.at(y, clamp_index(x + dx, plane.width), 0);
      tmp.at(y, x, 0) = s / n;
    }
  }
  Tensor out(plane.height, plane.width, 1);
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      double s = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        s += tmp.at(clamp_index(y + dy, plane.height), x, 0);
      out.at(y, x, 0) = s / n;
    }
  }
  return out;
}

}  // namespace sega
