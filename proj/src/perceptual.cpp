#include "sega/perceptual.hpp"

#include <cmath>

#include "sega/filters.hpp"

namespace sega {

void validate(const JndParams& p) {
  if (p.t0 <= 0.0 || p.gamma <= 0.0 || p.slope <= 0.0 || p.texture_gain <= 0.0)
    throw std::invalid_argument("JndParams: constants must be > 0");
  if (p.overlap < 0.0 || p.overlap >= 1.0)
    throw std::invalid_argument("JndParams: overlap must be in [0,1)");
  if (p.window < 1 || p.window % 2 == 0)
    throw std::invalid_argument("JndParams: window must be odd and >= 1");
}

Tensor jnd_map(const Image& x, const JndParams& params) {
  validate(params);
  Tensor y = luma(x);
  for (double& v : y.data) v *= 255.0;
  const int radius = params.window / 2;
  const Tensor background = box_mean(y, radius);

  const Tensor gh = correlate3(y, kSobelX);
  const Tensor gv = correlate3(y, kSobelY);
  Tensor gmag(y.height, y.width, 1);
  for (int i = 0; i < y.size(); ++i)
    gmag.data[i] = std::sqrt(gh.data[i] * gh.data[i] + gv.data[i] * gv.data[i]);
  const Tensor gmean = box_mean(gmag, radius);

  Tensor out(y.height, y.width, 1);
  for (int i = 0; i < y.size(); ++i) {
    const double b = background.data[i];
    const double la = b <= 127.0
                          ? params.t0 * (1.0 - std::sqrt(b / 127.0)) + params.gamma
                          : params.slope * (b - 127.0) + params.gamma;
    const double tm = params.texture_gain * gmean.data[i];
    const double jnd = la + tm - params.overlap * std::min(la, tm);
    out.data[i] = jnd / 255.0;
  }
  return out;
}

namespace {

constexpr int kSsimWindow = 11;

struct SsimWindow {
  double w[kSsimWindow * kSsimWindow];
  SsimWindow() {
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i)
      for (int j = 0; j < kSsimWindow; ++j) {
        const double dy = i - kSsimWindow / 2, dx = j - kSsimWindow / 2;
        w[i * kSsimWindow + j] = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
        sum += w[i * kSsimWindow + j];
      }
    for (double& v : w) v /= sum;
  }
};
const SsimWindow kWindow;

}  // namespace

double ssim(const Image& x, const Image& y) {
  require_same_shape(x, y, "ssim");
  if (x.height < kSsimWindow || x.width < kSsimWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  const Tensor a = luma(x);
  const Tensor b = luma(y);
  const double c1 = 0.01 * 0.01;  // (0.01 * R)^2, R = 1
  const double c2 = 0.03 * 0.03;

  double total = 0.0;
  long count = 0;
  for (int yy = 0; yy + kSsimWindow <= a.height; ++yy) {
    for (int xx = 0; xx + kSsimWindow <= a.width; ++xx) {
      double mua = 0.0, mub = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) {
        for (int j = 0; j < kSsimWindow; ++j) {
          const double w = kWindow.w[i * kSsimWindow + j];
          const double va = a.at(yy + i, xx + j, 0);
          const double vb = b.at(yy + i, xx + j, 0);
          mua += w * va;
          mub += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      }
      const double vara = saa - mua * mua;
      const double varb = sbb - mub * mub;
      const double cov = sab - mua * mub;
      const double value = ((2.0 * mua * mub + c1) * (2.0 * cov + c2)) /
                           ((mua * mua + mub * mub + c1) * (vara + varb + c2));
      total += value;
      ++count;
    }
  }
  return total / count;
}

long PerceptualReport::display_linf() const { return std::lround(linf); }

PerceptualReport perceptual_report(const Image& x, const Image& x_adv) {
  require_same_shape(x, x_adv, "perceptual_report");
  GradientField delta(x.height, x.width, x.channels);
  for (int i = 0; i < x.size(); ++i) delta.data[i] = x_adv.data[i] - x.data[i];
  PerceptualReport report;
  report.linf = to_255(lp_norm(delta, Norm::linf));
  report.l1 = to_255(mean_abs(delta));
  report.l2 = rms(delta);
  report.ssim = ssim(x, x_adv);
  return report;
}

}  // namespace sega
