#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sega/smoothing.hpp"

using namespace sega;

namespace {

FeatureScorerPtr constant_model(double c) {
  ScorerSpec spec;
  spec.kind = ScorerKind::smooth_pool;
  spec.seed = 1;
  return build_scorer(spec)->with_head({{0.0, 0.0, 0.0}, c});
}

std::shared_ptr<LinearModel> seeded_linear(std::uint64_t seed, int h, int w, int c,
                                           double scale = 0.02, double bias = 0.0) {
  GradientField weights = sample_gaussian(RngStream{seed, 0, 0}, h, w, c);
  for (double& v : weights.data) v *= scale;
  return std::make_shared<LinearModel>("lin" + std::to_string(seed), weights, bias);
}

}  // namespace

TEST_CASE("smoothing a constant model returns the constant") {
  const FeatureScorerPtr c = constant_model(12.5);
  const Image x = oracles::random_probe(1, 8, 8, 3);
  for (const double sigma : {0.01, 0.1, 0.5})
    CHECK(smoothed_score(*c, x, {sigma, 7, 99}) == doctest::Approx(12.5).epsilon(1e-12));
}

TEST_CASE("smoothed score of a linear model is unbiased within CLT range") {
  const auto lin = seeded_linear(3, 8, 8, 3);
  const Image x = oracles::random_probe(4, 8, 8, 3);
  const double exact = lin->score(x);
  SmoothingConfig cfg{0.1, 10000, 5};
  const double approx = smoothed_score(*lin, x, cfg);
  const double w_norm = lp_norm(lin->weights(), Norm::l2);
  CHECK(std::abs(approx - exact) <= 3.0 * cfg.sigma * w_norm / std::sqrt(cfg.samples));
}

TEST_CASE("smoothed score of the 1-d quadratic converges to x^2 + sigma^2") {
  const QuadraticModel quad;
  const Image x(1, 1, 1, 0.3);
  for (const double sigma : {0.1, 0.2}) {
    const double value = smoothed_score(quad, x, {sigma, 100000, 11});
    const double expect = 0.3 * 0.3 + sigma * sigma;
    CHECK(std::abs(value - expect) / expect <= 0.02);
  }
}

TEST_CASE("smoothed gradient of a linear model is exact for any sigma and m") {
  const auto lin = seeded_linear(6, 4, 4, 3);
  const Image x = oracles::random_probe(7, 4, 4, 3);
  for (const double sigma : {0.01, 0.3})
    for (const int m : {1, 5}) {
      const GradientField g = smoothed_gradient(*lin, x, {sigma, m, 13});
      for (int i = 0; i < g.size(); ++i)
        CHECK(g.data[i] == doctest::Approx(lin->weights().data[i]).epsilon(1e-14));
    }
}

TEST_CASE("sigma -> 0 recovers the raw gradient") {
  ScorerSpec spec;
  spec.kind = ScorerKind::conv;
  spec.seed = 21;
  const FeatureScorerPtr model = build_scorer(spec);
  const Image x = oracles::random_probe(8, 8, 8, 3);
  const GradientField exact = model->gradient(x);
  const GradientField smoothed = smoothed_gradient(*model, x, {1e-8, 3, 17});
  for (int i = 0; i < exact.size(); ++i)
    CHECK(smoothed.data[i] ==
          doctest::Approx(exact.data[i]).epsilon(1e-6).scale(std::abs(exact.data[i]) + 1e-12));
}

TEST_CASE("smoothed gradient of the quadratic matches the analytic derivative") {
  const QuadraticModel quad;
  const Image x(1, 1, 1, 0.5);
  const GradientField g = smoothed_gradient(quad, x, {0.1, 100000, 23});
  CHECK(std::abs(g.data[0] - 1.0) <= 0.02);
}

TEST_CASE("ensemble with K=1 reduces to smoothed_gradient") {
  ScorerSpec spec;
  spec.kind = ScorerKind::band_energy;
  spec.seed = 31;
  spec.kernel_count = 4;
  const FeatureScorerPtr model = build_scorer(spec);
  const Image x = oracles::random_probe(9, 8, 8, 3);
  const SmoothingConfig cfg{0.05, 6, 41};
  const EnsembleGradient ens = ensemble_gradient({model}, x, cfg);
  const GradientField single = smoothed_gradient(*model, x, cfg);
  CHECK(ens.gradient.data == single.data);
  CHECK(ens.forward_passes == 6);
}

TEST_CASE("identical copies with shared noise equal the single model exactly") {
  ScorerSpec spec;
  spec.kind = ScorerKind::conv;
  spec.seed = 61;
  const FeatureScorerPtr model = build_scorer(spec);
  const Image x = oracles::random_probe(10, 8, 8, 3);
  SmoothingConfig cfg{0.08, 4, 43};
  cfg.shared_noise = true;
  const EnsembleGradient one = ensemble_gradient({model}, x, cfg);
  const EnsembleGradient three = ensemble_gradient({model, model, model}, x, cfg);
  for (int i = 0; i < one.gradient.size(); ++i)
    CHECK(three.gradient.data[i] == doctest::Approx(one.gradient.data[i]).epsilon(1e-15));
}

TEST_CASE("ensemble of linear models averages the weights exactly") {
  const auto a = seeded_linear(71, 4, 4, 3);
  const auto b = seeded_linear(72, 4, 4, 3);
  const Image x = oracles::random_probe(11, 4, 4, 3);
  const EnsembleGradient ens = ensemble_gradient({a, b}, x, {0.2, 3, 47});
  for (int i = 0; i < x.size(); ++i)
    CHECK(ens.gradient.data[i] ==
          doctest::Approx((a->weights().data[i] + b->weights().data[i]) / 2.0)
              .epsilon(1e-12));
  CHECK_THROWS_AS(ensemble_gradient({}, x, {0.2, 3, 47}), std::invalid_argument);
}

TEST_CASE("ensemble gradient is bitwise deterministic") {
  const auto a = seeded_linear(81, 4, 4, 3);
  ScorerSpec spec;
  spec.kind = ScorerKind::conv;
  spec.seed = 82;
  const FeatureScorerPtr b = build_scorer(spec);
  const Image x = oracles::random_probe(12, 4, 4, 3);
  const SmoothingConfig cfg{10.0 / 255.0, 10, 1234};
  const EnsembleGradient r1 = ensemble_gradient({a, b}, x, cfg);
  const EnsembleGradient r2 = ensemble_gradient({a, b}, x, cfg);
  CHECK(r1.gradient.data == r2.gradient.data);
}

TEST_CASE("expected_norm closed forms") {
  const double pi = 3.14159265358979323846;
  CHECK(expected_norm(1) == doctest::Approx(std::sqrt(2.0 / pi)).epsilon(1e-12));
  CHECK(expected_norm(2) == doctest::Approx(std::sqrt(pi / 2.0)).epsilon(1e-12));
  CHECK(expected_norm(3) == doctest::Approx(2.0 * std::sqrt(2.0 / pi)).epsilon(1e-12));
  // large d stays finite and tracks sqrt(d - 1/2)
  const double big = expected_norm(3072);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(std::sqrt(3072.0 - 0.5)).epsilon(1e-4));
  CHECK_THROWS_AS(expected_norm(0), std::invalid_argument);
}

TEST_CASE("smoothing config validation") {
  CHECK_THROWS_AS(validate(SmoothingConfig{0.0, 5, 1}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SmoothingConfig{0.1, 0, 1}), std::invalid_argument);
}

TEST_CASE("theorem1 table: constant model has zero gaps") {
  const FeatureScorerPtr c = constant_model(5.0);
  const Image x = oracles::random_probe(13, 4, 4, 3);
  const Theorem1Report report = theorem1_check(*c, x, {0.2, 0.1, 0.05}, 200, 3);
  for (const Theorem1Row& row : report.rows) {
    CHECK(row.gap == 0.0);
    CHECK_FALSE(row.violation);
  }
  CHECK(report.pass);
}

TEST_CASE("theorem1 table: linear model gaps are pure sampling noise") {
  const auto lin = seeded_linear(91, 4, 4, 3);
  const Image x = oracles::random_probe(14, 4, 4, 3);
  const Theorem1Report report = theorem1_check(*lin, x, {0.2, 0.1, 0.05}, 2000, 5);
  CHECK(report.pass);
  // common random numbers: shrinking sigma scales the noise linearly
  CHECK(report.rows[0].gap > report.rows[2].gap);
  CHECK(report.rows[2].gap <= 3.0 * report.rows[2].mc_stderr);
}

TEST_CASE("monotone fidelity: quadratic smoothing error decays like 1/sqrt(m)") {
  const QuadraticModel quad;
  const Image x(1, 1, 1, 0.5);
  const double sigma = 0.1;
  std::vector<double> log_m, log_err;
  for (const int m : {100, 1000, 10000}) {
    double err = 0.0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
      const double value = smoothed_score(quad, x, {sigma, m, 1000u + rep});
      err += std::abs(value - (0.25 + sigma * sigma));
    }
    log_m.push_back(std::log10(static_cast<double>(m)));
    log_err.push_back(std::log10(err / reps));
  }
  // least-squares slope over the three grid points
  const double mx = (log_m[0] + log_m[1] + log_m[2]) / 3.0;
  const double my = (log_err[0] + log_err[1] + log_err[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (log_m[i] - mx) * (log_err[i] - my);
    den += (log_m[i] - mx) * (log_m[i] - mx);
  }
  const double slope = num / den;
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));
}

TEST_CASE("theorem2: self-ensemble bound holds with zero score gap") {
  ScorerSpec spec;
  spec.kind = ScorerKind::conv;
  spec.seed = 99;
  const FeatureScorerPtr model = build_scorer(spec);
  const Image x = oracles::random_probe(15, 8, 8, 3);
  const SmoothingConfig cfg{10.0 / 255.0, 20, 77};
  const BoundReport report = theorem2_check({model}, *model, x, cfg);
  CHECK(report.score_gap == 0.0);
  CHECK(report.pass);
  CHECK(report.bound == doctest::Approx(report.lipschitz * cfg.sigma *
                                        expected_norm(x.size())));
}

TEST_CASE("theorem2: all-linear scenario in exact arithmetic") {
  const int h = 4, w = 4, c = 3;
  const auto target = seeded_linear(110, h, w, c, 0.01, 50.0);
  const auto s1 = seeded_linear(111, h, w, c, 0.01, 52.0);
  const auto s2 = seeded_linear(112, h, w, c, 0.01, 49.0);
  const Image x = oracles::random_probe(16, h, w, c);
  const SmoothingConfig cfg{10.0 / 255.0, 5, 81};
  const BoundReport report = theorem2_check({s1, s2}, *target, x, cfg);

  CHECK(report.lipschitz == 0.0);  // constant gradients
  GradientField mean = s1->weights();
  for (int i = 0; i < mean.size(); ++i)
    mean.data[i] = (mean.data[i] + s2->weights().data[i]) / 2.0 - target->weights().data[i];
  CHECK(report.observed == doctest::Approx(lp_norm(mean, Norm::l2)).epsilon(1e-12));
  CHECK(report.bound ==
        doctest::Approx(report.score_gap / cfg.sigma * expected_norm(h * w * c)));
  CHECK(report.observed <= report.bound);
  CHECK(report.pass);
}
