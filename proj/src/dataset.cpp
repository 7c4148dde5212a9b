#include "sega/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "sega/filters.hpp"

namespace sega {

std::string to_string(PatternKind k) {
  switch (k) {
    case PatternKind::ramp: return "ramp";
    case PatternKind::checkerboard: return "checkerboard";
    case PatternKind::blobs: return "blobs";
    case PatternKind::value_noise: return "value-noise";
  }
  throw std::invalid_argument("to_string: unknown pattern kind");
}

std::string to_string(DistortionKind k) {
  switch (k) {
    case DistortionKind::gaussian_noise: return "noise";
    case DistortionKind::box_blur: return "blur";
  }
  throw std::invalid_argument("to_string: unknown distortion kind");
}

PatternKind pattern_from_string(const std::string& s) {
  if (s == "ramp") return PatternKind::ramp;
  if (s == "checkerboard") return PatternKind::checkerboard;
  if (s == "blobs") return PatternKind::blobs;
  if (s == "value-noise") return PatternKind::value_noise;
  throw std::invalid_argument("unknown pattern kind: " + s);
}

DistortionKind distortion_from_string(const std::string& s) {
  if (s == "noise") return DistortionKind::gaussian_noise;
  if (s == "blur") return DistortionKind::box_blur;
  throw std::invalid_argument("unknown distortion kind: " + s);
}

void validate(const CorpusSpec& spec) {
  if (spec.height < 1 || spec.width < 1 || (spec.channels != 1 && spec.channels != 3))
    throw std::invalid_argument("CorpusSpec: bad image shape");
  if (spec.patterns.empty() || spec.distortions.empty())
    throw std::invalid_argument("CorpusSpec: empty pattern/distortion grid");
  if (spec.levels.size() < 2)
    throw std::invalid_argument("CorpusSpec: need at least 2 distortion levels");
  if (spec.variants_per_pattern < 1)
    throw std::invalid_argument("CorpusSpec: variants_per_pattern must be >= 1");
  if (spec.noise_scale <= 0.0 || spec.kappa_noise <= 0.0 || spec.kappa_blur <= 0.0)
    throw std::invalid_argument("CorpusSpec: scales must be > 0");
}

namespace {

Image quantize8(Image img) {
  for (double& v : img.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return img;
}

double mean_gradient_energy(const Image& img) {
  double acc = 0.0;
  for (int c = 0; c < img.channels; ++c) {
    const Tensor plane = channel_plane(img, c);
    const Tensor gh = correlate3(plane, kSobelX);
    const Tensor gv = correlate3(plane, kSobelY);
    for (int i = 0; i < plane.size(); ++i)
      acc += std::sqrt(gh.data[i] * gh.data[i] + gv.data[i] * gv.data[i]);
  }
  return acc / img.size();
}

// All clean patterns are brought to one baseline profile: fixed mean, fixed
// contrast, and (via a bisected overlay amplitude) fixed mean gradient
// energy. Distortion level is the quantity the labels rank; per-pattern
// baseline spread would drown that signal for every pooled scorer, and a
// perfectly smooth pattern would not respond to blurring at all. The
// overlay is a mid-frequency ripple rather than white dither: blurring
// attenuates it in a different std-to-gradient ratio than white noise adds,
// which is what lets one linear head rank both distortion arms.
Image finalize_pattern(const Image& structure, Rng& rng) {
  constexpr double kMean = 0.5, kStd = 0.17, kGrad = 0.12;
  const int n = structure.size();

  Image unit = structure;
  {
    double mean = 0.0;
    for (double v : unit.data) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : unit.data) var += (v - mean) * (v - mean);
    var /= n;
    const double scale = 1.0 / std::max(std::sqrt(var), 1e-6);
    for (double& v : unit.data) v = scale * (v - mean);
  }
  Image dither(structure.height, structure.width, structure.channels);
  double var_d = 0.0;
  {
    const double pi = 3.14159265358979323846;
    const double angle = rng.next_uniform(0.0, 2.0 * pi);
    const double wavelength = 3.2;
    const double phase = rng.next_uniform(0.0, 2.0 * pi);
    const double fy = std::sin(angle) * 2.0 * pi / wavelength;
    const double fx = std::cos(angle) * 2.0 * pi / wavelength;
    for (int y = 0; y < dither.height; ++y)
      for (int x = 0; x < dither.width; ++x) {
        const double v = std::sin(fy * y + fx * x + phase);
        for (int c = 0; c < dither.channels; ++c) dither.at(y, x, c) = v;
      }
    for (double v : dither.data) var_d += v * v;
  }
  var_d /= n;

  auto compose = [&](double beta) {
    const double alpha =
        std::sqrt(std::max(kStd * kStd - beta * beta * var_d, 1e-8));
    Image img(structure.height, structure.width, structure.channels);
    for (int i = 0; i < n; ++i)
      img.data[i] = kMean + alpha * unit.data[i] + beta * dither.data[i];
    return img;
  };

  // dither raises gradient energy monotonically; bisect to the target
  double lo = 0.0, hi = 0.95 * kStd / std::sqrt(var_d);
  if (mean_gradient_energy(compose(lo)) >= kGrad) return clamp_image(compose(lo));
  if (mean_gradient_energy(compose(hi)) <= kGrad) return clamp_image(compose(hi));
  for (int it = 0; it < 24; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_gradient_energy(compose(mid)) < kGrad ? lo : hi) = mid;
  }
  return clamp_image(compose(0.5 * (lo + hi)));
}

Image make_ramp(const CorpusSpec& s, Rng& rng) {
  Image img(s.height, s.width, s.channels);
  const double angle = rng.next_uniform(0.0, 2.0 * 3.14159265358979323846);
  const double cx = std::cos(angle), cy = std::sin(angle);
  std::vector<double> lo(s.channels), hi(s.channels);
  for (int c = 0; c < s.channels; ++c) {
    lo[c] = rng.next_uniform(0.0, 0.45);
    hi[c] = rng.next_uniform(0.55, 1.0);
  }
  const double diag = std::hypot(s.height - 1.0, s.width - 1.0);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      const double t = 0.5 + (cy * y + cx * x) / (2.0 * diag);
      for (int c = 0; c < s.channels; ++c)
        img.at(y, x, c) = lo[c] + (hi[c] - lo[c]) * std::clamp(t, 0.0, 1.0);
    }
  return img;
}

Image make_checkerboard(const CorpusSpec& s, Rng& rng) {
  Image img(s.height, s.width, s.channels);
  const int cell = 6 + static_cast<int>(rng.next_below(5));  // 6..10, below the blur band
  const int py = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cell)));
  const int px = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cell)));
  std::vector<double> a(s.channels), b(s.channels);
  for (int c = 0; c < s.channels; ++c) {
    a[c] = rng.next_uniform(0.05, 0.45);
    b[c] = rng.next_uniform(0.55, 0.95);
  }
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      const bool on = (((y + py) / cell) + ((x + px) / cell)) % 2 == 0;
      for (int c = 0; c < s.channels; ++c) img.at(y, x, c) = on ? a[c] : b[c];
    }
  return img;
}

Image make_blobs(const CorpusSpec& s, Rng& rng) {
  const double bg = rng.next_uniform(0.2, 0.6);
  Image img(s.height, s.width, s.channels, bg);
  const int blobs = 3 + static_cast<int>(rng.next_below(4));  // 3..6
  for (int i = 0; i < blobs; ++i) {
    const double cy = rng.next_uniform(0.0, s.height);
    const double cx = rng.next_uniform(0.0, s.width);
    const double radius = rng.next_uniform(2.0, 0.3 * std::max(s.height, s.width));
    std::vector<double> amp(s.channels);
    for (int c = 0; c < s.channels; ++c) amp[c] = rng.next_uniform(-0.45, 0.45);
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        const double g = std::exp(-r2 / (2.0 * radius * radius));
        for (int c = 0; c < s.channels; ++c) img.at(y, x, c) += amp[c] * g;
      }
  }
  return img;
}

Image make_value_noise(const CorpusSpec& s, Rng& rng) {
  // coarse seeded lattice, bilinearly upsampled; a light per-channel tint
  const int gh = 4, gw = 4;
  std::vector<double> lattice(gh * gw);
  for (double& v : lattice) v = rng.next_uniform(0.15, 0.85);
  std::vector<double> tint(s.channels);
  for (int c = 0; c < s.channels; ++c) tint[c] = rng.next_uniform(-0.12, 0.12);
  Image img(s.height, s.width, s.channels);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      const double fy = static_cast<double>(y) / (s.height - 1) * (gh - 1);
      const double fx = static_cast<double>(x) / (s.width - 1) * (gw - 1);
      const int y0 = std::min(static_cast<int>(fy), gh - 2);
      const int x0 = std::min(static_cast<int>(fx), gw - 2);
      const double ty = fy - y0, tx = fx - x0;
      const double v = lattice[y0 * gw + x0] * (1 - ty) * (1 - tx) +
                       lattice[(y0 + 1) * gw + x0] * ty * (1 - tx) +
                       lattice[y0 * gw + x0 + 1] * (1 - ty) * tx +
                       lattice[(y0 + 1) * gw + x0 + 1] * ty * tx;
      for (int c = 0; c < s.channels; ++c) img.at(y, x, c) = v + tint[c];
    }
  return img;
}

Image make_pattern(const CorpusSpec& s, PatternKind kind, int kind_index, int variant) {
  Rng rng(RngStream{s.seed, static_cast<std::uint32_t>(kind_index),
                    static_cast<std::uint64_t>(variant)});
  switch (kind) {
    case PatternKind::ramp: return finalize_pattern(make_ramp(s, rng), rng);
    case PatternKind::checkerboard: return finalize_pattern(make_checkerboard(s, rng), rng);
    case PatternKind::blobs: return finalize_pattern(make_blobs(s, rng), rng);
    case PatternKind::value_noise: return finalize_pattern(make_value_noise(s, rng), rng);
  }
  throw std::invalid_argument("make_pattern: unknown kind");
}

Image box_blur_once(const Image& img) {
  Image out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    const Tensor blurred = box_mean(channel_plane(img, c), 1);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) out.at(y, x, c) = blurred.at(y, x, 0);
  }
  return out;
}

Image distort(const Image& clean, const CorpusSpec& s, DistortionKind kind, double level,
              Rng& rng) {
  if (level == 0.0) return clean;
  if (kind == DistortionKind::gaussian_noise) {
    Image out = clean;
    const double stddev = s.noise_scale * level;
    for (double& v : out.data) v += stddev * rng.next_normal();
    return clamp_image(out);
  }
  // box blur, graded: blend toward the twice box-filtered image so that
  // consecutive levels stay distinguishable (full passes saturate the
  // high-frequency loss after the first application)
  const Image full = box_blur_once(box_blur_once(clean));
  const double t = std::min(1.0, 0.25 * level);
  Image out = clean;
  for (int i = 0; i < out.size(); ++i)
    out.data[i] = (1.0 - t) * clean.data[i] + t * full.data[i];
  return out;
}

}  // namespace

std::vector<LabeledImage> generate_corpus(const CorpusSpec& spec) {
  validate(spec);
  std::vector<LabeledImage> corpus;
  corpus.reserve(spec.patterns.size() * spec.variants_per_pattern * spec.distortions.size() *
                 spec.levels.size());
  for (std::size_t pi = 0; pi < spec.patterns.size(); ++pi) {
    const PatternKind pattern = spec.patterns[pi];
    for (int variant = 0; variant < spec.variants_per_pattern; ++variant) {
      const Image clean = make_pattern(spec, pattern, static_cast<int>(pi), variant);
      for (std::size_t di = 0; di < spec.distortions.size(); ++di) {
        const DistortionKind distortion = spec.distortions[di];
        const double kappa = distortion == DistortionKind::gaussian_noise
                                 ? spec.kappa_noise
                                 : spec.kappa_blur;
        for (std::size_t li = 0; li < spec.levels.size(); ++li) {
          const double level = spec.levels[li];
          Rng rng(RngStream{spec.seed ^ 0xD157D157ull,
                            static_cast<std::uint32_t>((pi * 64 + variant) * 8 + di),
                            static_cast<std::uint64_t>(li)});
          LabeledImage item;
          item.id = to_string(pattern) + "_v" + std::to_string(variant) + "_" +
                    to_string(distortion) + "_l" + std::to_string(li);
          item.image = quantize8(distort(clean, spec, distortion, level, rng));
          item.mos = 100.0 * std::exp(-kappa * level);
          item.pattern = pattern;
          item.distortion = distortion;
          item.level = level;
          item.variant = variant;
          corpus.push_back(std::move(item));
        }
      }
    }
  }
  return corpus;
}

std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> split_corpus(
    const std::vector<LabeledImage>& corpus, double train_fraction, std::uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw std::invalid_argument("split_corpus: fraction must be in (0,1)");
  const std::size_t n = corpus.size();
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    throw std::invalid_argument("split_corpus: degenerate split sizes");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed ^ 0x5EED5EEDull);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
    std::swap(order[i], order[j]);
  }
  std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> out;
  for (std::size_t i = 0; i < n; ++i)
    (i < n_train ? out.first : out.second).push_back(corpus[order[i]]);
  return out;
}

}  // namespace sega
