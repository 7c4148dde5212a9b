#include "sega/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace sega {

namespace {

std::vector<double> before_of(const std::vector<ScorePair>& pairs) {
  std::vector<double> v(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) v[i] = pairs[i].before;
  return v;
}

std::vector<double> after_of(const std::vector<ScorePair>& pairs) {
  std::vector<double> v(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) v[i] = pairs[i].after;
  return v;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0)
    throw UndefinedCorrelation("correlation undefined for a constant vector");
  return sab / std::sqrt(saa * sbb);
}

/// Mid-ranks: ties receive the average of the ranks they occupy.
std::vector<double> mid_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double mae(const std::vector<ScorePair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("mae: empty input");
  double s = 0.0;
  for (const ScorePair& p : pairs) s += std::abs(p.after - p.before);
  return s / static_cast<double>(pairs.size());
}

double r_robustness(const std::vector<ScorePair>& pairs, double beta_hi, double beta_lo) {
  if (pairs.empty()) throw std::invalid_argument("r_robustness: empty input");
  if (beta_hi <= beta_lo) throw std::invalid_argument("r_robustness: invalid score bounds");
  constexpr double kEpsNum = 1e-6;
  double s = 0.0;
  for (const ScorePair& p : pairs) {
    const double headroom = std::max(beta_hi - p.before, p.before - beta_lo);
    const double change = std::max(std::abs(p.after - p.before), kEpsNum);
    s += std::log10(headroom / change);
  }
  return s / static_cast<double>(pairs.size());
}

double srocc(const std::vector<ScorePair>& pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("srocc: need >= 2 pairs");
  return pearson(mid_ranks(before_of(pairs)), mid_ranks(after_of(pairs)));
}

double plcc(const std::vector<ScorePair>& pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("plcc: need >= 2 pairs");
  return pearson(before_of(pairs), after_of(pairs));
}

double krocc(const std::vector<ScorePair>& pairs) {
  const std::size_t n = pairs.size();
  if (n < 2) throw std::invalid_argument("krocc: need >= 2 pairs");
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pairs[j].before - pairs[i].before;
      const double dy = pairs[j].after - pairs[i].after;
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0))
        ++concordant;
      else
        ++discordant;
    }
  }
  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  const double denom = std::sqrt((n0 - ties_x) * (n0 - ties_y));
  if (denom == 0.0) throw UndefinedCorrelation("krocc undefined: all-tied vector");
  return (concordant - discordant) / denom;
}

EvalReport build_report(const std::vector<ScorePair>& pairs,
                        const std::vector<PerceptualReport>& bundles, EvalMeta meta,
                        double beta_hi, double beta_lo) {
  if (pairs.empty()) throw std::invalid_argument("build_report: empty batch");
  if (!bundles.empty() && bundles.size() != pairs.size())
    throw std::invalid_argument("build_report: inconsistent batch sizes");
  EvalReport report;
  report.meta = std::move(meta);
  report.metrics.mae = mae(pairs);
  report.metrics.r = r_robustness(pairs, beta_hi, beta_lo);
  if (pairs.size() >= 2) {
    try {
      report.metrics.srocc = srocc(pairs);
    } catch (const UndefinedCorrelation&) {
    }
    try {
      report.metrics.plcc = plcc(pairs);
    } catch (const UndefinedCorrelation&) {
    }
    try {
      report.metrics.krocc = krocc(pairs);
    } catch (const UndefinedCorrelation&) {
    }
  }
  if (!bundles.empty()) {
    double ssim_s = 0.0, l1_s = 0.0, l2_s = 0.0, linf_s = 0.0;
    for (const PerceptualReport& b : bundles) {
      ssim_s += b.ssim;
      l1_s += b.l1;
      l2_s += b.l2;
      linf_s += b.linf;
    }
    const double n = static_cast<double>(bundles.size());
    report.perceptual = {ssim_s / n, l1_s / n, l2_s / n, linf_s / n};
  }
  return report;
}

namespace {

nlohmann::ordered_json optional_to_json(const std::optional<double>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

std::optional<double> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string format_optional(const std::optional<double>& v) {
  if (!v.has_value()) return "na";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["metrics"] = {{"mae", report.metrics.mae},
                  {"r", report.metrics.r},
                  {"srocc", optional_to_json(report.metrics.srocc)},
                  {"plcc", optional_to_json(report.metrics.plcc)},
                  {"krocc", optional_to_json(report.metrics.krocc)}};
  j["perceptual"] = {{"ssim", report.perceptual.ssim},
                     {"l1", report.perceptual.l1},
                     {"l2", report.perceptual.l2},
                     {"linf", report.perceptual.linf}};
  j["meta"] = {{"target", report.meta.target},
               {"sources", report.meta.sources},
               {"method", report.meta.method},
               {"seed", report.meta.seed},
               {"forward_passes", report.meta.forward_passes_per_image},
               {"config", report.meta.config},
               {"r_convention", report.meta.r_convention}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EvalReport report;
  report.metrics.mae = j.at("metrics").at("mae").get<double>();
  report.metrics.r = j.at("metrics").at("r").get<double>();
  report.metrics.srocc = optional_from_json(j.at("metrics").at("srocc"));
  report.metrics.plcc = optional_from_json(j.at("metrics").at("plcc"));
  report.metrics.krocc = optional_from_json(j.at("metrics").at("krocc"));
  report.perceptual.ssim = j.at("perceptual").at("ssim").get<double>();
  report.perceptual.l1 = j.at("perceptual").at("l1").get<double>();
  report.perceptual.l2 = j.at("perceptual").at("l2").get<double>();
  report.perceptual.linf = j.at("perceptual").at("linf").get<double>();
  report.meta.target = j.at("meta").at("target").get<std::string>();
  report.meta.sources = j.at("meta").at("sources").get<std::vector<std::string>>();
  report.meta.method = j.at("meta").at("method").get<std::string>();
  report.meta.seed = j.at("meta").at("seed").get<std::uint64_t>();
  report.meta.forward_passes_per_image = j.at("meta").at("forward_passes").get<long>();
  report.meta.config = j.at("meta").at("config").get<std::string>();
  report.meta.r_convention = j.at("meta").at("r_convention").get<std::string>();
  return report;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "mae,r,srocc,plcc,krocc,ssim,l1,l2,linf,forward_passes\n";
  os << report.metrics.mae << "," << report.metrics.r << ","
     << format_optional(report.metrics.srocc) << "," << format_optional(report.metrics.plcc)
     << "," << format_optional(report.metrics.krocc) << "," << report.perceptual.ssim << ","
     << report.perceptual.l1 << "," << report.perceptual.l2 << "," << report.perceptual.linf
     << "," << report.meta.forward_passes_per_image << "\n";
  return os.str();
}

}  // namespace sega
