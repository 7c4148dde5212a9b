#include "sega/models.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "sega/filters.hpp"

namespace sega {

namespace {

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double logistic(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Conv kernels are drawn at this gain so the softplus gates actually move
// under jitter at the default smoothing scale.
constexpr double kConvKernelGain = 2.0;

// Compensated extended-precision accumulation: pooled sums run over every
// pixel, and the finite-difference gradient checks sit right at the noise
// floor of a naive double running sum.
struct KahanSum {
  long double sum = 0.0L;
  long double carry = 0.0L;
  void add(double v) {
    const long double y = v - carry;
    const long double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double over(double denom) const { return static_cast<double>(sum / denom); }
};

}  // namespace

// ---------------------------------------------------------------------------
// Reference models
// ---------------------------------------------------------------------------

double LinearModel::score(const Image& x) const {
  require_same_shape(x, weights_, "LinearModel::score");
  double s = bias_;
  for (int i = 0; i < x.size(); ++i) s += weights_.data[i] * x.data[i];
  return s;
}

GradientField LinearModel::gradient(const Image& x) const {
  require_same_shape(x, weights_, "LinearModel::gradient");
  return weights_;
}

double QuadraticModel::score(const Image& x) const {
  double s = 0.0;
  for (double v : x.data) s += v * v;
  return s;
}

GradientField QuadraticModel::gradient(const Image& x) const {
  GradientField g = x;
  for (double& v : g.data) v *= 2.0;
  return g;
}

// ---------------------------------------------------------------------------
// FeatureScorer base
// ---------------------------------------------------------------------------

double FeatureScorer::score(const Image& x) const {
  const std::vector<double> phi = compute_features(x);
  return dot(head_.weights, phi) + head_.bias;
}

GradientField FeatureScorer::gradient(const Image& x) const {
  return weighted_gradient(x, head_.weights);
}

std::shared_ptr<FeatureScorer> FeatureScorer::with_head(LinearHead head) const {
  if (static_cast<int>(head.weights.size()) != feature_count())
    throw std::invalid_argument("with_head: weight count mismatch");
  auto copy = clone();
  copy->head_ = std::move(head);
  return copy;
}

// ---------------------------------------------------------------------------
// smooth-pool
// ---------------------------------------------------------------------------

namespace {
// Uncalibrated heads keep |score| of order one; finite-difference checks of
// the gradient lose precision to cancellation when a large constant bias
// dominates the score.
LinearHead default_head(std::uint64_t seed, int features) {
  Rng rng(seed ^ 0xA5A5A5A5A5A5A5A5ull);
  LinearHead head;
  head.weights.resize(features);
  for (double& w : head.weights) w = 0.1 * rng.next_normal();
  head.bias = 0.0;
  return head;
}
}  // namespace

SmoothPoolScorer::SmoothPoolScorer(ScorerSpec spec)
    : SmoothPoolScorer(spec, default_head(spec.seed, 3)) {}

SmoothPoolScorer::SmoothPoolScorer(ScorerSpec spec, LinearHead head)
    : FeatureScorer(std::move(spec), std::move(head)) {
  if (spec_.delta <= 0.0) throw std::invalid_argument("smooth-pool: delta must be > 0");
}

std::vector<double> SmoothPoolScorer::compute_features(const Image& x) const {
  const int d = x.size();
  KahanSum mean_sum;
  for (double v : x.data) mean_sum.add(v);
  const double mean = mean_sum.over(d);

  KahanSum var_sum;
  for (double v : x.data) var_sum.add((v - mean) * (v - mean));
  const double var = var_sum.over(d);

  KahanSum grad_sum;
  for (int c = 0; c < x.channels; ++c) {
    const Tensor plane = channel_plane(x, c);
    const Tensor gh = correlate3(plane, kSobelX);
    const Tensor gv = correlate3(plane, kSobelY);
    for (int i = 0; i < plane.size(); ++i)
      grad_sum.add(
          std::sqrt(gh.data[i] * gh.data[i] + gv.data[i] * gv.data[i] + spec_.delta));
  }
  return {mean, std::sqrt(var + spec_.delta), grad_sum.over(d)};
}

GradientField SmoothPoolScorer::weighted_gradient(const Image& x,
                                                  const std::vector<double>& w) const {
  const int d = x.size();
  const std::vector<double> phi = compute_features(x);
  double mean = 0.0;
  for (double v : x.data) mean += v;
  mean /= d;

  GradientField grad(x.height, x.width, x.channels);
  // d(mean)/dx_j = 1/d ; d(sqrt(var+delta))/dx_j = (x_j - mean) / (d * phi1)
  const double c0 = w[0] / d;
  const double c1 = w[1] / (d * phi[1]);
  for (int i = 0; i < d; ++i) grad.data[i] = c0 + c1 * (x.data[i] - mean);

  if (w[2] != 0.0) {
    const double c2 = w[2] / d;
    for (int c = 0; c < x.channels; ++c) {
      const Tensor plane = channel_plane(x, c);
      const Tensor gh = correlate3(plane, kSobelX);
      const Tensor gv = correlate3(plane, kSobelY);
      Tensor coeff_h(x.height, x.width, 1), coeff_v(x.height, x.width, 1);
      for (int i = 0; i < plane.size(); ++i) {
        const double r =
            std::sqrt(gh.data[i] * gh.data[i] + gv.data[i] * gv.data[i] + spec_.delta);
        coeff_h.data[i] = c2 * gh.data[i] / r;
        coeff_v.data[i] = c2 * gv.data[i] / r;
      }
      Tensor acc(x.height, x.width, 1);
      correlate3_adjoint(coeff_h, kSobelX, acc);
      correlate3_adjoint(coeff_v, kSobelY, acc);
      for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx)
          grad.at(y, xx, c) += acc.at(y, xx, 0);
    }
  }
  return grad;
}

std::shared_ptr<FeatureScorer> SmoothPoolScorer::clone() const {
  return std::shared_ptr<FeatureScorer>(new SmoothPoolScorer(spec_, head_));
}

// ---------------------------------------------------------------------------
// conv
// ---------------------------------------------------------------------------

ConvScorer::ConvScorer(ScorerSpec spec)
    : ConvScorer(spec, default_head(spec.seed, spec.kernel_count)) {}

ConvScorer::ConvScorer(ScorerSpec spec, LinearHead head)
    : FeatureScorer(std::move(spec), std::move(head)) {
  if (spec_.kernel_count < 1) throw std::invalid_argument("conv: kernel_count must be >= 1");
  if (spec_.kernel_size != 3) throw std::invalid_argument("conv: only 3x3 kernels supported");
  init_kernels();
}

void ConvScorer::init_kernels() {
  Rng rng(spec_.seed);
  const int nk = spec_.kernel_count;
  kernels_.resize(static_cast<std::size_t>(nk) * 3 * 9);
  biases_.resize(nk);
  const double scale = kConvKernelGain / std::sqrt(27.0);
  for (double& k : kernels_) k = scale * rng.next_normal();
  for (double& b : biases_) b = 0.3 * rng.next_normal();
}

std::vector<double> ConvScorer::compute_features(const Image& x) const {
  const int nk = spec_.kernel_count;
  const int npix = x.height * x.width;
  std::vector<double> phi(nk, 0.0);
  for (int k = 0; k < nk; ++k) {
    const double* ker = &kernels_[static_cast<std::size_t>(k) * 27];
    KahanSum acc;
    for (int y = 0; y < x.height; ++y) {
      for (int xx = 0; xx < x.width; ++xx) {
        double z = biases_[k];
        for (int c = 0; c < x.channels && c < 3; ++c)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
              z += ker[c * 9 + (dy + 1) * 3 + (dx + 1)] *
                   x.at(clamp_index(y + dy, x.height), clamp_index(xx + dx, x.width), c);
        acc.add(softplus(z));
      }
    }
    phi[k] = acc.over(npix);
  }
  return phi;
}

GradientField ConvScorer::weighted_gradient(const Image& x,
                                            const std::vector<double>& w) const {
  const int nk = spec_.kernel_count;
  const int npix = x.height * x.width;
  GradientField grad(x.height, x.width, x.channels);
  for (int k = 0; k < nk; ++k) {
    if (w[k] == 0.0) continue;
    const double* ker = &kernels_[static_cast<std::size_t>(k) * 27];
    const double wk = w[k] / npix;
    for (int y = 0; y < x.height; ++y) {
      for (int xx = 0; xx < x.width; ++xx) {
        double z = biases_[k];
        for (int c = 0; c < x.channels && c < 3; ++c)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
              z += ker[c * 9 + (dy + 1) * 3 + (dx + 1)] *
                   x.at(clamp_index(y + dy, x.height), clamp_index(xx + dx, x.width), c);
        const double gate = wk * logistic(z);
        for (int c = 0; c < x.channels && c < 3; ++c)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
              grad.at(clamp_index(y + dy, x.height), clamp_index(xx + dx, x.width), c) +=
                  gate * ker[c * 9 + (dy + 1) * 3 + (dx + 1)];
      }
    }
  }
  return grad;
}

std::shared_ptr<FeatureScorer> ConvScorer::clone() const {
  return std::shared_ptr<FeatureScorer>(new ConvScorer(spec_, head_));
}

// ---------------------------------------------------------------------------
// band-energy (8x8 block DCT)
// ---------------------------------------------------------------------------

namespace {

struct DctBasis {
  double d[8][8];
  DctBasis() {
    const double pi = 3.14159265358979323846;
    for (int u = 0; u < 8; ++u) {
      const double cu = (u == 0) ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int t = 0; t < 8; ++t) d[u][t] = cu * std::cos(pi * (2 * t + 1) * u / 16.0);
    }
  }
};
const DctBasis kDct;

void dct_block(const double in[8][8], double out[8][8]) {
  double tmp[8][8];
  for (int u = 0; u < 8; ++u)
    for (int t = 0; t < 8; ++t) {
      double s = 0.0;
      for (int r = 0; r < 8; ++r) s += kDct.d[u][r] * in[r][t];
      tmp[u][t] = s;
    }
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int t = 0; t < 8; ++t) s += tmp[u][t] * kDct.d[v][t];
      out[u][v] = s;
    }
}

void idct_block(const double in[8][8], double out[8][8]) {
  double tmp[8][8];
  for (int s = 0; s < 8; ++s)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += kDct.d[u][s] * in[u][v];
      tmp[s][v] = acc;
    }
  for (int s = 0; s < 8; ++s)
    for (int t = 0; t < 8; ++t) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += tmp[s][v] * kDct.d[v][t];
      out[s][t] = acc;
    }
}

}  // namespace

BandEnergyScorer::BandEnergyScorer(ScorerSpec spec)
    : BandEnergyScorer(spec, default_head(spec.seed, spec.kernel_count)) {}

BandEnergyScorer::BandEnergyScorer(ScorerSpec spec, LinearHead head)
    : FeatureScorer(std::move(spec), std::move(head)) {
  if (spec_.kernel_count < 1 || spec_.kernel_count > 15)
    throw std::invalid_argument("band-energy: band count must be in [1,15]");
}

int BandEnergyScorer::band_of(int u, int v) const {
  const int bands = spec_.kernel_count;
  const int s = u + v;  // 0..14
  const int b = s * bands / 15;
  return b >= bands ? bands - 1 : b;
}

std::vector<double> BandEnergyScorer::compute_features(const Image& x) const {
  const int bands = spec_.kernel_count;
  std::vector<KahanSum> energy(bands);
  std::vector<double> count(bands, 0.0);
  const int by_n = (x.height + 7) / 8;
  const int bx_n = (x.width + 7) / 8;
  double blk[8][8], coef[8][8];
  for (int c = 0; c < x.channels; ++c) {
    for (int by = 0; by < by_n; ++by) {
      for (int bx = 0; bx < bx_n; ++bx) {
        for (int r = 0; r < 8; ++r)
          for (int t = 0; t < 8; ++t)
            blk[r][t] = x.at(clamp_index(by * 8 + r, x.height),
                             clamp_index(bx * 8 + t, x.width), c);
        dct_block(blk, coef);
        for (int u = 0; u < 8; ++u)
          for (int v = 0; v < 8; ++v) {
            const int b = band_of(u, v);
            energy[b].add(coef[u][v] * coef[u][v]);
            count[b] += 1.0;
          }
      }
    }
  }
  std::vector<double> phi(bands);
  for (int b = 0; b < bands; ++b) phi[b] = softplus(energy[b].over(count[b]));
  return phi;
}

GradientField BandEnergyScorer::weighted_gradient(const Image& x,
                                                  const std::vector<double>& w) const {
  const int bands = spec_.kernel_count;
  std::vector<KahanSum> energy(bands);
  std::vector<double> count(bands, 0.0);
  const int by_n = (x.height + 7) / 8;
  const int bx_n = (x.width + 7) / 8;
  // pass 1: coefficients and band energies
  std::vector<double> coefs(static_cast<std::size_t>(x.channels) * by_n * bx_n * 64);
  {
    double blk[8][8], coef[8][8];
    std::size_t idx = 0;
    for (int c = 0; c < x.channels; ++c) {
      for (int by = 0; by < by_n; ++by) {
        for (int bx = 0; bx < bx_n; ++bx) {
          for (int r = 0; r < 8; ++r)
            for (int t = 0; t < 8; ++t)
              blk[r][t] = x.at(clamp_index(by * 8 + r, x.height),
                               clamp_index(bx * 8 + t, x.width), c);
          dct_block(blk, coef);
          for (int u = 0; u < 8; ++u)
            for (int v = 0; v < 8; ++v) {
              const int b = band_of(u, v);
              energy[b].add(coef[u][v] * coef[u][v]);
              count[b] += 1.0;
              coefs[idx++] = coef[u][v];
            }
        }
      }
    }
  }
  std::vector<double> gate(bands);
  for (int b = 0; b < bands; ++b)
    gate[b] = w[b] * logistic(energy[b].over(count[b])) * 2.0 / count[b];

  // pass 2: backproject d(score)/d(coef) and scatter into pixels
  GradientField grad(x.height, x.width, x.channels);
  double gcoef[8][8], gpix[8][8];
  std::size_t idx = 0;
  for (int c = 0; c < x.channels; ++c) {
    for (int by = 0; by < by_n; ++by) {
      for (int bx = 0; bx < bx_n; ++bx) {
        for (int u = 0; u < 8; ++u)
          for (int v = 0; v < 8; ++v) {
            gcoef[u][v] = gate[band_of(u, v)] * coefs[idx++];
          }
        idct_block(gcoef, gpix);
        for (int r = 0; r < 8; ++r)
          for (int t = 0; t < 8; ++t)
            grad.at(clamp_index(by * 8 + r, x.height),
                    clamp_index(bx * 8 + t, x.width), c) += gpix[r][t];
      }
    }
  }
  return grad;
}

std::shared_ptr<FeatureScorer> BandEnergyScorer::clone() const {
  return std::shared_ptr<FeatureScorer>(new BandEnergyScorer(spec_, head_));
}

// ---------------------------------------------------------------------------
// factory / calibration / serialization
// ---------------------------------------------------------------------------

std::string to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::smooth_pool: return "smooth-pool";
    case ScorerKind::conv: return "conv";
    case ScorerKind::band_energy: return "band-energy";
  }
  throw std::invalid_argument("to_string: unknown scorer kind");
}

ScorerKind scorer_kind_from_string(const std::string& s) {
  if (s == "smooth-pool") return ScorerKind::smooth_pool;
  if (s == "conv") return ScorerKind::conv;
  if (s == "band-energy") return ScorerKind::band_energy;
  throw std::invalid_argument("unknown scorer kind: " + s);
}

FeatureScorerPtr build_scorer(const ScorerSpec& spec) {
  switch (spec.kind) {
    case ScorerKind::smooth_pool: return std::make_shared<SmoothPoolScorer>(spec);
    case ScorerKind::conv: return std::make_shared<ConvScorer>(spec);
    case ScorerKind::band_energy: return std::make_shared<BandEnergyScorer>(spec);
  }
  throw std::invalid_argument("build_scorer: unknown scorer kind");
}

namespace {

// Cholesky solve of an SPD system; pivot failure means the normal equations
// are singular at this lambda.
std::vector<double> chol_solve(std::vector<double> a, std::vector<double> b, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        s -= a[static_cast<std::size_t>(i) * n + k] * a[static_cast<std::size_t>(j) * n + k];
      if (i == j) {
        if (s <= 1e-12)
          throw SingularSystemError(
              "calibrate_scorer: design matrix is singular; raise the ridge lambda");
        a[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
      } else {
        a[static_cast<std::size_t>(i) * n + j] = s / a[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  // forward then backward substitution
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[static_cast<std::size_t>(i) * n + k] * b[k];
    b[i] = s / a[static_cast<std::size_t>(i) * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a[static_cast<std::size_t>(k) * n + i] * b[k];
    b[i] = s / a[static_cast<std::size_t>(i) * n + i];
  }
  return b;
}

}  // namespace

FeatureScorerPtr calibrate_scorer(const FeatureScorer& model,
                                  const std::vector<Image>& images,
                                  const std::vector<double>& labels, double lambda) {
  if (images.size() != labels.size())
    throw std::invalid_argument("calibrate_scorer: image/label count mismatch");
  const int n = static_cast<int>(images.size());
  if (n < 2) throw std::invalid_argument("calibrate_scorer: need at least 2 samples");
  bool distinct = false;
  for (int i = 1; i < n; ++i)
    if (labels[i] != labels[0]) distinct = true;
  if (!distinct) throw std::invalid_argument("calibrate_scorer: need >= 2 distinct labels");
  if (lambda < 0.0) throw std::invalid_argument("calibrate_scorer: lambda must be >= 0");

  // Features are standardized per column before the ridge solve; feature
  // scales differ by orders of magnitude across scorer kinds, and the
  // penalty should act evenly. The head is mapped back afterwards.
  const int f = model.feature_count() + 1;  // + intercept column
  std::vector<double> design(static_cast<std::size_t>(n) * f);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> phi = model.features(images[i]);
    for (int j = 0; j < f - 1; ++j) design[static_cast<std::size_t>(i) * f + j] = phi[j];
    design[static_cast<std::size_t>(i) * f + (f - 1)] = 1.0;
  }
  std::vector<double> mu(f - 1, 0.0), sd(f - 1, 0.0);
  for (int j = 0; j < f - 1; ++j) {
    for (int i = 0; i < n; ++i) mu[j] += design[static_cast<std::size_t>(i) * f + j];
    mu[j] /= n;
    for (int i = 0; i < n; ++i) {
      const double dev = design[static_cast<std::size_t>(i) * f + j] - mu[j];
      sd[j] += dev * dev;
    }
    sd[j] = std::sqrt(sd[j] / n);
    if (sd[j] < 1e-12) sd[j] = 1.0;  // constant column: centered to zero
    for (int i = 0; i < n; ++i)
      design[static_cast<std::size_t>(i) * f + j] =
          (design[static_cast<std::size_t>(i) * f + j] - mu[j]) / sd[j];
  }

  std::vector<double> theta(f, 0.0);
  if (n >= f) {
    std::vector<double> a(static_cast<std::size_t>(f) * f, 0.0), b(f, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < f; ++j) {
        b[j] += design[static_cast<std::size_t>(i) * f + j] * labels[i];
        for (int k = 0; k < f; ++k)
          a[static_cast<std::size_t>(j) * f + k] +=
              design[static_cast<std::size_t>(i) * f + j] *
              design[static_cast<std::size_t>(i) * f + k];
      }
    for (int j = 0; j < f; ++j) a[static_cast<std::size_t>(j) * f + j] += lambda;
    theta = chol_solve(std::move(a), std::move(b), f);
  } else {
    // Gram form; at lambda = 0 this is the minimum-norm interpolant.
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < f; ++k)
          s += design[static_cast<std::size_t>(i) * f + k] *
               design[static_cast<std::size_t>(j) * f + k];
        g[static_cast<std::size_t>(i) * n + j] = s + (i == j ? lambda : 0.0);
      }
    const std::vector<double> beta = chol_solve(std::move(g), labels, n);
    for (int k = 0; k < f; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += design[static_cast<std::size_t>(i) * f + k] * beta[i];
      theta[k] = s;
    }
  }

  LinearHead head;
  head.weights.resize(f - 1);
  head.bias = theta.back();
  for (int j = 0; j < f - 1; ++j) {
    head.weights[j] = theta[j] / sd[j];
    head.bias -= theta[j] * mu[j] / sd[j];
  }
  return model.with_head(std::move(head));
}

std::string scorer_to_json(const FeatureScorer& model) {
  nlohmann::ordered_json j;
  const ScorerSpec& s = model.spec();
  j["kind"] = to_string(s.kind);
  j["seed"] = s.seed;
  j["hyperparameters"] = {{"kernel_count", s.kernel_count},
                          {"kernel_size", s.kernel_size},
                          {"delta", s.delta}};
  j["head"] = {{"weights", model.head().weights}, {"bias", model.head().bias}};
  j["score_range"] = {model.range().lo, model.range().hi};
  j["name"] = model.name();
  return j.dump(2) + "\n";
}

FeatureScorerPtr scorer_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ScorerSpec spec;
  spec.kind = scorer_kind_from_string(j.at("kind").get<std::string>());
  spec.seed = j.at("seed").get<std::uint64_t>();
  const auto& h = j.at("hyperparameters");
  spec.kernel_count = h.at("kernel_count").get<int>();
  spec.kernel_size = h.at("kernel_size").get<int>();
  spec.delta = h.at("delta").get<double>();
  spec.name = j.at("name").get<std::string>();
  LinearHead head;
  head.weights = j.at("head").at("weights").get<std::vector<double>>();
  head.bias = j.at("head").at("bias").get<double>();
  return build_scorer(spec)->with_head(std::move(head));
}

void save_scorer(const FeatureScorer& model, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_scorer: cannot open " + path);
  out << scorer_to_json(model);
  if (!out) throw IoError("save_scorer: short write to " + path);
}

FeatureScorerPtr load_scorer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_scorer: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return scorer_from_json(text);
}

}  // namespace sega
