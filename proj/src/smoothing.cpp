#include "sega/smoothing.hpp"

#include <cmath>

namespace sega {

void validate(const SmoothingConfig& cfg) {
  if (cfg.sigma <= 0.0) throw std::invalid_argument("SmoothingConfig: sigma must be > 0");
  if (cfg.samples < 1) throw std::invalid_argument("SmoothingConfig: m must be >= 1");
}

namespace {

Image jitter(const Image& x, double sigma, const RngStream& stream) {
  Image y = x;
  Rng rng(stream);
  for (double& v : y.data) v += sigma * rng.next_normal();
  return y;
}

}  // namespace

double smoothed_score(const ScoringModel& model, const Image& x,
                      const SmoothingConfig& cfg) {
  validate(cfg);
  double acc = 0.0;
  for (int i = 0; i < cfg.samples; ++i)
    acc += model.score(jitter(x, cfg.sigma, {cfg.seed, 0, static_cast<std::uint64_t>(i)}));
  return acc / cfg.samples;
}

GradientField smoothed_gradient(const ScoringModel& model, const Image& x,
                                const SmoothingConfig& cfg) {
  validate(cfg);
  GradientField acc(x.height, x.width, x.channels);
  for (int i = 0; i < cfg.samples; ++i) {
    const GradientField g =
        model.gradient(jitter(x, cfg.sigma, {cfg.seed, 0, static_cast<std::uint64_t>(i)}));
    for (int j = 0; j < acc.size(); ++j) acc.data[j] += g.data[j];
  }
  for (double& v : acc.data) v /= cfg.samples;
  return acc;
}

EnsembleGradient ensemble_gradient(const std::vector<ModelPtr>& models, const Image& x,
                                   const SmoothingConfig& cfg) {
  validate(cfg);
  if (models.empty()) throw std::invalid_argument("ensemble_gradient: no models");
  EnsembleGradient out;
  out.gradient = GradientField(x.height, x.width, x.channels);
  out.config = cfg;
  const int k_n = static_cast<int>(models.size());
  for (int k = 0; k < k_n; ++k) {
    out.models.push_back(models[k]->name());
    const std::uint32_t stream_k = cfg.shared_noise ? 0u : static_cast<std::uint32_t>(k);
    for (int i = 0; i < cfg.samples; ++i) {
      const GradientField g = models[k]->gradient(
          jitter(x, cfg.sigma, {cfg.seed, stream_k, static_cast<std::uint64_t>(i)}));
      require_same_shape(g, out.gradient, "ensemble_gradient");
      for (int j = 0; j < g.size(); ++j) out.gradient.data[j] += g.data[j];
    }
  }
  const double n = static_cast<double>(k_n) * cfg.samples;
  for (double& v : out.gradient.data) v /= n;
  out.forward_passes = static_cast<long>(k_n) * cfg.samples;
  return out;
}

EnsembleGradient ensemble_raw_gradient(const std::vector<ModelPtr>& models, const Image& x) {
  if (models.empty()) throw std::invalid_argument("ensemble_raw_gradient: no models");
  EnsembleGradient out;
  out.gradient = GradientField(x.height, x.width, x.channels);
  out.config = SmoothingConfig{};
  for (const ModelPtr& m : models) {
    out.models.push_back(m->name());
    const GradientField g = m->gradient(x);
    require_same_shape(g, out.gradient, "ensemble_raw_gradient");
    for (int j = 0; j < g.size(); ++j) out.gradient.data[j] += g.data[j];
  }
  for (double& v : out.gradient.data) v /= static_cast<double>(models.size());
  out.forward_passes = static_cast<long>(models.size());
  return out;
}

double expected_norm(int d) {
  if (d < 1) throw std::invalid_argument("expected_norm: d must be >= 1");
  const double a = std::lgamma((d + 1) / 2.0);
  const double b = std::lgamma(d / 2.0);
  return std::sqrt(2.0) * std::exp(a - b);
}

// ---------------------------------------------------------------------------
// Theorem 1
// ---------------------------------------------------------------------------

Theorem1Report theorem1_check(const ScoringModel& model, const Image& x,
                              const std::vector<double>& sigma_grid, int m,
                              std::uint64_t seed) {
  if (sigma_grid.empty()) throw std::invalid_argument("theorem1_check: empty grid");
  Theorem1Report report;
  const double f_exact = model.score(x);
  const int d = x.size();
  const double e_norm = expected_norm(d);

  // Empirical Lipschitz constant of f from probe pairs around x at the
  // largest grid scale.
  double sigma_max = 0.0;
  for (double s : sigma_grid) sigma_max = std::max(sigma_max, s);
  double lip = 0.0;
  for (int p = 0; p < 64; ++p) {
    const Image a = jitter(x, sigma_max, {seed ^ 0x7E57ull, 1000, static_cast<std::uint64_t>(2 * p)});
    const Image b = jitter(x, sigma_max, {seed ^ 0x7E57ull, 1000, static_cast<std::uint64_t>(2 * p + 1)});
    GradientField diff(a.height, a.width, a.channels);
    for (int j = 0; j < diff.size(); ++j) diff.data[j] = a.data[j] - b.data[j];
    const double dist = lp_norm(diff, Norm::l2);
    if (dist > 0.0) lip = std::max(lip, std::abs(model.score(a) - model.score(b)) / dist);
  }
  report.lipschitz = lip;

  for (double sigma : sigma_grid) {
    // Common random numbers: substreams indexed by i only, so every sigma
    // sees the same u_i.
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const double fi =
          model.score(jitter(x, sigma, {seed, 0, static_cast<std::uint64_t>(i)}));
      acc += fi;
      acc2 += fi * fi;
    }
    const double mean = acc / m;
    const double var = std::max(0.0, acc2 / m - mean * mean);
    Theorem1Row row;
    row.sigma = sigma;
    row.gap = std::abs(mean - f_exact);
    row.bound = lip * sigma * e_norm;
    row.mc_stderr = std::sqrt(var / m);
    row.violation = row.gap > row.bound + 3.0 * row.mc_stderr;
    if (row.violation) report.pass = false;
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Theorem 2
// ---------------------------------------------------------------------------

BoundReport theorem2_check(const std::vector<ModelPtr>& sources, const ScoringModel& target,
                           const Image& x, const SmoothingConfig& cfg, int probe_pairs) {
  validate(cfg);
  if (sources.empty()) throw std::invalid_argument("theorem2_check: no sources");
  BoundReport report;
  report.dimension = x.size();
  report.sigma = cfg.sigma;
  const std::uint64_t probe_seed = cfg.seed ^ 0xB0B0B0B0ull;

  // L: gradient-difference ratios of the target over probe pairs at the
  // smoothing scale (where the bound is applied) and at a wider scale.
  double lip = 0.0;
  for (int p = 0; p < probe_pairs; ++p) {
    const double scale = (p % 2 == 0) ? cfg.sigma : 3.0 * cfg.sigma;
    const Image a = jitter(x, scale, {probe_seed, 2000, static_cast<std::uint64_t>(2 * p)});
    const Image b = jitter(x, scale, {probe_seed, 2000, static_cast<std::uint64_t>(2 * p + 1)});
    GradientField ga = target.gradient(a);
    const GradientField gb = target.gradient(b);
    for (int j = 0; j < ga.size(); ++j) ga.data[j] -= gb.data[j];
    GradientField diff(a.height, a.width, a.channels);
    for (int j = 0; j < diff.size(); ++j) diff.data[j] = a.data[j] - b.data[j];
    const double dist = lp_norm(diff, Norm::l2);
    if (dist > 0.0) lip = std::max(lip, lp_norm(ga, Norm::l2) / dist);
  }
  report.lipschitz = lip;

  // C: max source-vs-target score gap over x and jittered probes.
  double gap = 0.0;
  for (int p = 0; p <= probe_pairs; ++p) {
    const Image probe =
        p == 0 ? x : jitter(x, cfg.sigma, {probe_seed, 3000, static_cast<std::uint64_t>(p)});
    const double ht = target.score(probe);
    for (const ModelPtr& src : sources)
      gap = std::max(gap, std::abs(src->score(probe) - ht));
  }
  report.score_gap = gap;

  // Observed error plus the Monte-Carlo standard error of the ghat mean.
  const EnsembleGradient ens = ensemble_gradient(sources, x, cfg);
  const GradientField gh = target.gradient(x);
  GradientField delta = ens.gradient;
  for (int j = 0; j < delta.size(); ++j) delta.data[j] -= gh.data[j];
  report.observed = lp_norm(delta, Norm::l2);

  const long n = ens.forward_passes;
  double spread2 = 0.0;  // sum over samples of ||g_s - ghat||^2
  {
    const int k_n = static_cast<int>(sources.size());
    for (int k = 0; k < k_n; ++k) {
      const std::uint32_t stream_k = cfg.shared_noise ? 0u : static_cast<std::uint32_t>(k);
      for (int i = 0; i < cfg.samples; ++i) {
        Image y = x;
        Rng rng(RngStream{cfg.seed, stream_k, static_cast<std::uint64_t>(i)});
        for (double& v : y.data) v += cfg.sigma * rng.next_normal();
        const GradientField gs = sources[k]->gradient(y);
        for (int j = 0; j < gs.size(); ++j) {
          const double dv = gs.data[j] - ens.gradient.data[j];
          spread2 += dv * dv;
        }
      }
    }
  }
  report.mc_stderr = n > 1 ? std::sqrt(spread2 / (static_cast<double>(n) * (n - 1))) : 0.0;

  report.bound = (report.lipschitz * cfg.sigma + report.score_gap / cfg.sigma) *
                 expected_norm(report.dimension);
  report.pass = report.observed <= report.bound + 3.0 * report.mc_stderr;
  return report;
}

}  // namespace sega
