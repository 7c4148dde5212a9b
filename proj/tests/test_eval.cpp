#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sega/eval.hpp"

using namespace sega;

namespace {

std::vector<ScorePair> zip(const std::vector<double>& before,
                           const std::vector<double>& after) {
  std::vector<ScorePair> pairs;
  for (std::size_t i = 0; i < before.size(); ++i)
    pairs.push_back({"img" + std::to_string(i), before[i], after[i]});
  return pairs;
}

std::vector<double> random_scores(std::uint64_t seed, int n, bool with_ties) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v)
    x = with_ties ? static_cast<double>(rng.next_below(8)) : rng.next_uniform(0.0, 100.0);
  return v;
}

}  // namespace

TEST_CASE("mae") {
  CHECK(mae(zip({50, 40}, {60, 35})) == doctest::Approx(7.5).epsilon(1e-15));
  CHECK(mae(zip({1, 2, 3}, {1, 2, 3})) == 0.0);
  const auto pairs = zip({10, 20, 30}, {11, 25, 28});
  auto doubled = pairs;
  for (ScorePair& p : doubled) p.after = p.before + 2.0 * (p.after - p.before);
  CHECK(mae(doubled) == doctest::Approx(2.0 * mae(pairs)).epsilon(1e-12));
  CHECK_THROWS_AS(mae({}), std::invalid_argument);
}

TEST_CASE("r robustness") {
  CHECK(r_robustness(zip({50}, {60}), 100.0, 0.0) ==
        doctest::Approx(std::log10(5.0)).epsilon(1e-12));
  // zero change saturates at the documented floor
  CHECK(r_robustness(zip({50}, {50}), 100.0, 0.0) ==
        doctest::Approx(std::log10(50.0 / 1e-6)).epsilon(1e-12));
  // driving the score to the far bound exhausts the headroom
  CHECK(r_robustness(zip({50}, {100}), 100.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(r_robustness({}, 100.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(r_robustness(zip({50}, {60}), 0.0, 100.0), std::invalid_argument);
}

TEST_CASE("srocc worked examples") {
  CHECK(srocc(zip({1, 2, 3, 4}, {1, 2, 3, 4})) == 1.0);
  CHECK(srocc(zip({1, 2, 3, 4}, {4, 3, 2, 1})) == -1.0);
  CHECK(srocc(zip({1, 2, 3, 4}, {1, 3, 2, 4})) == 0.8);
}

TEST_CASE("srocc equals the no-ties rank-difference formula") {
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 3 + rep;
    const std::vector<double> a = random_scores(100 + rep, n, false);
    const std::vector<double> b = random_scores(200 + rep, n, false);
    CHECK(std::abs(srocc(zip(a, b)) - oracles::spearman_no_ties(a, b)) <= 1e-12);
  }
}

TEST_CASE("srocc with ties equals the independent mid-rank reference") {
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 5 + rep;
    const std::vector<double> a = random_scores(300 + rep, n, true);
    const std::vector<double> b = random_scores(400 + rep, n, true);
    bool defined = true;
    double mine = 0.0, ref = 0.0;
    try {
      mine = srocc(zip(a, b));
      ref = oracles::spearman_midrank_reference(a, b);
    } catch (const std::exception&) {
      defined = false;
    }
    if (defined) CHECK(std::abs(mine - ref) <= 1e-12);
  }
}

TEST_CASE("plcc") {
  auto affine = zip({1, 2, 3}, {3, 5, 7});  // after = 2 * before + 1
  CHECK(plcc(affine) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(plcc(zip({1, 2, 3}, {-1, -2, -3})) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(plcc(zip({1, 2, 3}, {1, 2, 4})) == doctest::Approx(0.98198).epsilon(1e-5));
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<double> a = random_scores(500 + rep, 12, false);
    const std::vector<double> b = random_scores(600 + rep, 12, false);
    CHECK(std::abs(plcc(zip(a, b)) - oracles::pearson_reference(a, b)) <= 1e-12);
    // invariance under a positive affine map; sign flip under negation
    std::vector<double> b2 = b;
    for (double& v : b2) v = 3.0 * v + 7.0;
    CHECK(plcc(zip(a, b2)) == doctest::Approx(plcc(zip(a, b))).epsilon(1e-12));
    for (double& v : b2) v = -v;
    CHECK(plcc(zip(a, b2)) == doctest::Approx(-plcc(zip(a, b))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(plcc(zip({5, 5, 5}, {1, 2, 3})), UndefinedCorrelation);
}

TEST_CASE("srocc/krocc invariance under strictly monotone transforms") {
  const std::vector<double> a = random_scores(700, 15, false);
  const std::vector<double> b = random_scores(701, 15, false);
  std::vector<double> b_exp = b;
  for (double& v : b_exp) v = std::exp(v / 40.0);
  CHECK(srocc(zip(a, b_exp)) == doctest::Approx(srocc(zip(a, b))).epsilon(1e-12));
  CHECK(krocc(zip(a, b_exp)) == doctest::Approx(krocc(zip(a, b))).epsilon(1e-12));
}

TEST_CASE("krocc worked examples") {
  CHECK(krocc(zip({1, 2, 3}, {4, 5, 6})) == 1.0);
  CHECK(krocc(zip({1, 2, 3}, {3, 2, 1})) == -1.0);
  CHECK(krocc(zip({1, 2, 3}, {1, 3, 2})) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(krocc(zip({5, 5, 5}, {1, 2, 3})), UndefinedCorrelation);
}

TEST_CASE("krocc equals the tau-b reference on tied vectors") {
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 4 + 2 * rep;
    const std::vector<double> a = random_scores(800 + rep, n, rep % 2 == 0);
    const std::vector<double> b = random_scores(900 + rep, n, true);
    bool defined = true;
    double mine = 0.0, ref = 0.0;
    try {
      mine = krocc(zip(a, b));
      ref = oracles::kendall_taub_reference(a, b);
    } catch (const std::exception&) {
      defined = false;
    }
    if (defined) CHECK(std::abs(mine - ref) <= 1e-12);
  }
}

TEST_CASE("build_report on a no-op attack") {
  const std::vector<double> before = {30, 50, 70, 90};
  const auto pairs = zip(before, before);
  const Image x = oracles::random_probe(1, 16, 16, 3);
  std::vector<PerceptualReport> bundles(4, perceptual_report(x, x));
  EvalMeta meta;
  meta.target = "t";
  meta.method = "sega";
  const EvalReport report = build_report(pairs, bundles, meta);
  CHECK(report.metrics.mae == 0.0);
  CHECK(*report.metrics.srocc == 1.0);
  CHECK(*report.metrics.plcc == 1.0);
  CHECK(*report.metrics.krocc == 1.0);
  CHECK(report.perceptual.ssim == 1.0);
  CHECK(report.perceptual.l1 == 0.0);
}

TEST_CASE("single-image batches mark rank metrics not applicable") {
  EvalMeta meta;
  const EvalReport report = build_report(zip({50}, {60}), {}, meta);
  CHECK_FALSE(report.metrics.srocc.has_value());
  CHECK_FALSE(report.metrics.plcc.has_value());
  CHECK_FALSE(report.metrics.krocc.has_value());
  CHECK(report.metrics.mae == 10.0);
  const std::string csv = report_to_csv(report);
  CHECK(csv.find("na,na,na") != std::string::npos);
}

TEST_CASE("report JSON round trip is lossless") {
  EvalMeta meta;
  meta.target = "conv_a";
  meta.sources = {"pool_a", "band_a"};
  meta.method = "sega";
  meta.seed = 7;
  meta.forward_passes_per_image = 30;
  meta.config = "{\"epsilon\":0.03}";
  const Image x = oracles::random_probe(2, 16, 16, 3);
  Image y = x;
  y.data[10] += 0.02;
  const EvalReport report = build_report(zip({30, 50, 70}, {35, 45, 80}),
                                         {perceptual_report(x, y), perceptual_report(x, y),
                                          perceptual_report(x, y)},
                                         meta);
  const std::string text = report_to_json(report);
  const EvalReport back = report_from_json(text);
  CHECK(report_to_json(back) == text);
  CHECK(back.metrics.mae == report.metrics.mae);
  CHECK(*back.metrics.srocc == *report.metrics.srocc);
  CHECK(back.perceptual.ssim == report.perceptual.ssim);
  CHECK(back.meta.sources == report.meta.sources);
}

TEST_CASE("batch size mismatch is rejected") {
  EvalMeta meta;
  const Image x = oracles::random_probe(3, 16, 16, 3);
  CHECK_THROWS_AS(build_report(zip({1, 2}, {1, 2}), {perceptual_report(x, x)}, meta),
                  std::invalid_argument);
}
