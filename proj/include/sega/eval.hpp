#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sega/perceptual.hpp"

namespace sega {

/// Target-model scores for one image before and after an attack.
struct ScorePair {
  std::string id;
  double before = 0.0;
  double after = 0.0;
};

double mae(const std::vector<ScorePair>& pairs);

/// Mean over pairs of log10(attainable headroom / achieved change), with the
/// change floored at 1e-6 so a no-op attack saturates instead of diverging.
/// Headroom is max(beta_hi - before, before - beta_lo). Lower is a stronger
/// attack.
double r_robustness(const std::vector<ScorePair>& pairs, double beta_hi, double beta_lo);

/// Spearman rank correlation: Pearson over mid-ranks (ties get the average
/// rank). Throws on a constant vector.
double srocc(const std::vector<ScorePair>& pairs);

/// Pearson linear correlation. Throws on a constant vector.
double plcc(const std::vector<ScorePair>& pairs);

/// Kendall tau-b by direct pair counting. Throws when either vector is
/// entirely tied.
double krocc(const std::vector<ScorePair>& pairs);

struct UndefinedCorrelation : std::runtime_error {
  explicit UndefinedCorrelation(const std::string& what) : std::runtime_error(what) {}
};

struct EvalMetrics {
  double mae = 0.0;
  double r = 0.0;
  // Not-applicable (batch of one, or a degenerate constant vector) is
  // reported as an empty optional; it serializes as null / "na".
  std::optional<double> srocc;
  std::optional<double> plcc;
  std::optional<double> krocc;
};

struct PerceptualSummary {
  double ssim = 1.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

struct EvalMeta {
  std::string target;
  std::vector<std::string> sources;
  std::string method;
  std::uint64_t seed = 0;
  long forward_passes_per_image = 0;
  std::string config;  // attack config echo, serialized JSON
  std::string r_convention = "per-image mean";
};

struct EvalReport {
  EvalMetrics metrics;
  PerceptualSummary perceptual;
  EvalMeta meta;
};

/// Aggregates score pairs and per-image perceptual bundles; rank metrics on
/// fewer than two pairs come back as not-applicable.
EvalReport build_report(const std::vector<ScorePair>& pairs,
                        const std::vector<PerceptualReport>& bundles, EvalMeta meta,
                        double beta_hi = 100.0, double beta_lo = 0.0);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Two-line CSV with the columns in table order:
/// mae,r,srocc,plcc,krocc,ssim,l1,l2,linf,forward_passes.
std::string report_to_csv(const EvalReport& report);

}  // namespace sega
