#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sega/models.hpp"

using namespace sega;

namespace {

ScorerSpec spec_of(ScorerKind kind, std::uint64_t seed, int kernels = 6) {
  ScorerSpec s;
  s.kind = kind;
  s.seed = seed;
  s.kernel_count = kind == ScorerKind::band_energy ? 4 : kernels;
  return s;
}

// Images whose pooled statistics actually vary: constants, checkerboards and
// noise fields at assorted levels and amplitudes.
Image diverse_probe(int index) {
  const double level = 0.15 + 0.1 * (index % 7);
  const double amp = 0.05 + 0.04 * (index % 5);
  Image img(8, 8, 3, level);
  if (index % 3 == 1) {
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x)
        for (int c = 0; c < 3; ++c)
          img.at(y, x, c) += ((y + x) % 2 == 0 ? amp : -amp);
  } else if (index % 3 == 2) {
    Rng rng(9000 + index);
    for (double& v : img.data) v += amp * rng.next_uniform(-1.0, 1.0);
  }
  return img;
}

}  // namespace

TEST_CASE("build_scorer is constructively deterministic") {
  const Image probe = oracles::random_probe(1, 8, 8, 3);
  for (const ScorerKind kind :
       {ScorerKind::smooth_pool, ScorerKind::conv, ScorerKind::band_energy}) {
    const FeatureScorerPtr a = build_scorer(spec_of(kind, 77));
    const FeatureScorerPtr b = build_scorer(spec_of(kind, 77));
    CHECK(a->score(probe) == b->score(probe));
    CHECK(a->gradient(probe).data == b->gradient(probe).data);
  }
}

TEST_CASE("smooth-pool mean head recovers the constant") {
  ScorerSpec spec = spec_of(ScorerKind::smooth_pool, 5);
  const FeatureScorerPtr base = build_scorer(spec);
  const FeatureScorerPtr mean_only = base->with_head({{1.0, 0.0, 0.0}, 0.0});
  const Image c(6, 7, 3, 0.37);
  CHECK(mean_only->score(c) == doctest::Approx(0.37).epsilon(1e-12));

  const GradientField g = mean_only->gradient(c);
  for (double v : g.data) CHECK(v == doctest::Approx(1.0 / c.size()).epsilon(1e-12));
}

TEST_CASE("conv forward pass matches a naive reimplementation") {
  ScorerSpec spec = spec_of(ScorerKind::conv, 31, 4);
  const auto conv = std::dynamic_pointer_cast<ConvScorer>(build_scorer(spec));
  REQUIRE(conv);
  const Image x = oracles::random_probe(2, 9, 7, 3);

  auto softplus = [](double z) { return std::log1p(std::exp(z)); };
  auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
  const std::vector<double>& ker = conv->kernels();
  const std::vector<double>& bias = conv->biases();
  double expect = conv->head().bias;
  for (int k = 0; k < spec.kernel_count; ++k) {
    double pool = 0.0;
    for (int y = 0; y < x.height; ++y)
      for (int xx = 0; xx < x.width; ++xx) {
        double z = bias[k];
        for (int c = 0; c < 3; ++c)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
              z += ker[k * 27 + c * 9 + (dy + 1) * 3 + (dx + 1)] *
                   x.at(clampi(y + dy, x.height), clampi(xx + dx, x.width), c);
        pool += softplus(z);
      }
    expect += conv->head().weights[k] * pool / (x.height * x.width);
  }
  CHECK(conv->score(x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences") {
  for (const ScorerKind kind :
       {ScorerKind::smooth_pool, ScorerKind::conv, ScorerKind::band_energy}) {
    const FeatureScorerPtr model = build_scorer(spec_of(kind, 123));
    for (int p = 0; p < 5; ++p) {
      const Image probe = oracles::random_probe(1000 + p, 8, 8, 3);
      const double err =
          oracles::max_rel_err(model->gradient(probe), oracles::fd_gradient(*model, probe));
      CAPTURE(to_string(kind));
      CHECK(err <= 1e-4);
    }
    // odd size exercises the clamped block padding
    const Image odd = oracles::random_probe(2000, 9, 7, 3);
    CHECK(oracles::max_rel_err(model->gradient(odd), oracles::fd_gradient(*model, odd)) <=
          1e-4);
  }
}

TEST_CASE("linear model gradient is the weight field exactly") {
  GradientField w = sample_gaussian(RngStream{4, 0, 0}, 4, 4, 3);
  const LinearModel lin("lin", w, 1.5);
  const Image x = oracles::random_probe(6, 4, 4, 3);
  CHECK(lin.gradient(x).data == w.data);
  double expect = 1.5;
  for (int i = 0; i < x.size(); ++i) expect += w.data[i] * x.data[i];
  CHECK(lin.score(x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("models are pure: interleaved call sequences commute") {
  const FeatureScorerPtr model = build_scorer(spec_of(ScorerKind::conv, 9));
  const Image a = oracles::random_probe(11, 8, 8, 3);
  const Image b = oracles::random_probe(12, 8, 8, 3);
  const double sa1 = model->score(a);
  const GradientField gb1 = model->gradient(b);
  const double sb1 = model->score(b);
  const double sa2 = model->score(a);
  const GradientField gb2 = model->gradient(b);
  CHECK(sa1 == sa2);
  CHECK(gb1.data == gb2.data);
  CHECK(sb1 == model->score(b));
}

TEST_CASE("scores stay finite and continuous along a segment") {
  const Image x = oracles::random_probe(21, 8, 8, 3);
  GradientField v = sample_gaussian(RngStream{22, 0, 0}, 8, 8, 3);
  for (const ScorerKind kind :
       {ScorerKind::smooth_pool, ScorerKind::conv, ScorerKind::band_energy}) {
    const FeatureScorerPtr model = build_scorer(spec_of(kind, 200));
    double prev = 0.0;
    bool first = true;
    for (int step = 0; step <= 100; ++step) {
      Image probe = x;
      const double t = 0.1 * step / 100.0;
      for (int i = 0; i < probe.size(); ++i) probe.data[i] += t * v.data[i];
      const double s = model->score(probe);
      CHECK(std::isfinite(s));
      if (!first) CHECK(std::abs(s - prev) <= 1.0);  // no jumps on a short segment
      prev = s;
      first = false;
    }
  }
}

TEST_CASE("calibration with labels equal to outputs barely moves the head") {
  const FeatureScorerPtr model = build_scorer(spec_of(ScorerKind::smooth_pool, 42));
  std::vector<Image> images;
  std::vector<double> labels;
  for (int i = 0; i < 24; ++i) {
    images.push_back(diverse_probe(i));
    labels.push_back(model->score(images.back()));
  }
  const FeatureScorerPtr refit = calibrate_scorer(*model, images, labels, 1e-3);
  double base_norm = std::abs(model->head().bias);
  double diff_norm = std::abs(refit->head().bias - model->head().bias);
  for (std::size_t j = 0; j < model->head().weights.size(); ++j) {
    base_norm = std::max(base_norm, std::abs(model->head().weights[j]));
    diff_norm = std::max(diff_norm, std::abs(refit->head().weights[j] -
                                             model->head().weights[j]));
  }
  CHECK(diff_norm / base_norm <= 1e-3);
}

TEST_CASE("two-point lambda=0 calibration solves the 2x2 Gram system exactly") {
  const FeatureScorerPtr model = build_scorer(spec_of(ScorerKind::smooth_pool, 8));
  const std::vector<Image> images = {diverse_probe(1), diverse_probe(5)};
  const std::vector<double> labels = {30.0, 70.0};
  const std::vector<double> f0 = model->features(images[0]);
  const std::vector<double> f1 = model->features(images[1]);
  for (int j = 0; j < 3; ++j) REQUIRE(f0[j] != f1[j]);
  const FeatureScorerPtr refit = calibrate_scorer(*model, images, labels, 0.0);

  // hand-solved minimum-norm interpolant on the standardized two-point
  // design: rows are [-e, 1] and [+e, 1] with e_j = sgn(f1_j - f0_j), so the
  // 2x2 Gram system has entries 4 and -2.
  double e[3], mu[3], sd[3];
  for (int j = 0; j < 3; ++j) {
    mu[j] = (f0[j] + f1[j]) / 2.0;
    sd[j] = std::abs(f1[j] - f0[j]) / 2.0;
    e[j] = f1[j] > f0[j] ? 1.0 : -1.0;
  }
  const double g00 = 4.0, g01 = -2.0, g11 = 4.0;
  const double det = g00 * g11 - g01 * g01;  // 12
  const double beta0 = (g11 * labels[0] - g01 * labels[1]) / det;
  const double beta1 = (-g01 * labels[0] + g00 * labels[1]) / det;
  double bias = beta0 + beta1;
  for (int j = 0; j < 3; ++j) {
    const double theta_j = e[j] * (beta1 - beta0);
    CHECK(refit->head().weights[j] == doctest::Approx(theta_j / sd[j]).epsilon(1e-9));
    bias -= theta_j * mu[j] / sd[j];
  }
  CHECK(refit->head().bias == doctest::Approx(bias).epsilon(1e-9));

  // interpolates both points
  CHECK(refit->score(images[0]) == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(refit->score(images[1]) == doctest::Approx(70.0).epsilon(1e-6));
}

TEST_CASE("degenerate design matrix raises a singularity error") {
  const FeatureScorerPtr model = build_scorer(spec_of(ScorerKind::smooth_pool, 8));
  const Image same = oracles::random_probe(303, 8, 8, 3);
  const std::vector<Image> images = {same, same, same};
  const std::vector<double> labels = {10.0, 20.0, 30.0};
  CHECK_THROWS_AS(calibrate_scorer(*model, images, labels, 0.0), SingularSystemError);
  CHECK_THROWS_AS(calibrate_scorer(*model, {same}, {1.0}, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_scorer(*model, images, {5.0, 5.0, 5.0}, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("scorer JSON round trip preserves behavior") {
  const Image probe = oracles::random_probe(51, 8, 8, 3);
  for (const ScorerKind kind :
       {ScorerKind::smooth_pool, ScorerKind::conv, ScorerKind::band_energy}) {
    ScorerSpec spec = spec_of(kind, 314);
    spec.name = "roundtrip";
    const FeatureScorerPtr model = build_scorer(spec);
    const FeatureScorerPtr back = scorer_from_json(scorer_to_json(*model));
    CHECK(back->name() == "roundtrip");
    CHECK(back->score(probe) == model->score(probe));
    CHECK(back->gradient(probe).data == model->gradient(probe).data);
  }
}

TEST_CASE("unknown kind and bad delta are rejected") {
  CHECK_THROWS_AS(scorer_kind_from_string("mystery"), std::invalid_argument);
  ScorerSpec bad = spec_of(ScorerKind::smooth_pool, 1);
  bad.delta = 0.0;
  CHECK_THROWS_AS(build_scorer(bad), std::invalid_argument);
}
