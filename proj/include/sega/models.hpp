#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sega/tensor.hpp"

namespace sega {

struct ScoreRange {
  double lo = 0.0;
  double hi = 100.0;
};

/// A no-reference quality scorer: a pure map from an image to a scalar score
/// plus its exact input gradient. Implementations carry no mutable state, so
/// score/gradient may be called concurrently.
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;
  virtual const std::string& name() const = 0;
  virtual ScoreRange range() const = 0;
  virtual double score(const Image& x) const = 0;
  virtual GradientField gradient(const Image& x) const = 0;
};

using ModelPtr = std::shared_ptr<const ScoringModel>;

// ---------------------------------------------------------------------------
// Closed-form reference models (verification fixtures)
// ---------------------------------------------------------------------------

/// score = w . x + b with an explicit weight field; the gradient is w exactly.
class LinearModel final : public ScoringModel {
 public:
  LinearModel(std::string name, GradientField weights, double bias = 0.0)
      : name_(std::move(name)), weights_(std::move(weights)), bias_(bias) {}

  const std::string& name() const override { return name_; }
  ScoreRange range() const override { return {}; }
  double score(const Image& x) const override;
  GradientField gradient(const Image& x) const override;
  const GradientField& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::string name_;
  GradientField weights_;
  double bias_;
};

/// score = sum_j x_j^2; at d=1 this is the quadratic whose Gaussian smoothing
/// is x^2 + sigma^2.
class QuadraticModel final : public ScoringModel {
 public:
  explicit QuadraticModel(std::string name = "quadratic") : name_(std::move(name)) {}
  const std::string& name() const override { return name_; }
  ScoreRange range() const override { return {}; }
  double score(const Image& x) const override;
  GradientField gradient(const Image& x) const override;

 private:
  std::string name_;
};

// ---------------------------------------------------------------------------
// The scorer zoo
// ---------------------------------------------------------------------------

enum class ScorerKind { smooth_pool, conv, band_energy };

std::string to_string(ScorerKind k);
ScorerKind scorer_kind_from_string(const std::string& s);

/// Fully determines a zoo scorer: building the same spec twice yields models
/// that agree on every input.
struct ScorerSpec {
  ScorerKind kind = ScorerKind::smooth_pool;
  std::uint64_t seed = 0;
  int kernel_count = 6;   // conv kernels, or band count for band_energy
  int kernel_size = 3;    // conv only (3 supported)
  double delta = 1e-6;    // smoothing constant inside square roots
  std::string name;       // defaults to "<kind>-<seed>"

  std::string display_name() const {
    return name.empty() ? to_string(kind) + "-" + std::to_string(seed) : name;
  }
};

struct LinearHead {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Base for the zoo: score = head.w . features(x) + head.b, with every
/// feature built from smooth primitives so the exact gradient
/// sum_j w_j grad(phi_j) exists everywhere (including outside [0,1], which
/// smoothing relies on).
class FeatureScorer : public ScoringModel {
 public:
  const std::string& name() const final { return name_; }
  ScoreRange range() const final { return range_; }

  double score(const Image& x) const final;
  GradientField gradient(const Image& x) const final;

  std::vector<double> features(const Image& x) const { return compute_features(x); }
  virtual int feature_count() const = 0;

  const ScorerSpec& spec() const { return spec_; }
  const LinearHead& head() const { return head_; }

  /// Copy of this model with a replacement head (used by calibration).
  std::shared_ptr<FeatureScorer> with_head(LinearHead head) const;

 protected:
  FeatureScorer(ScorerSpec spec, LinearHead head)
      : spec_(std::move(spec)), head_(std::move(head)), name_(spec_.display_name()) {}

  virtual std::vector<double> compute_features(const Image& x) const = 0;
  /// sum_j w_j grad(phi_j)(x); w has feature_count() entries.
  virtual GradientField weighted_gradient(const Image& x,
                                          const std::vector<double>& w) const = 0;
  virtual std::shared_ptr<FeatureScorer> clone() const = 0;

  ScorerSpec spec_;
  LinearHead head_;
  std::string name_;
  ScoreRange range_{0.0, 100.0};
};

using FeatureScorerPtr = std::shared_ptr<FeatureScorer>;

/// phi = [mean intensity, sqrt(var + delta), mean sqrt(gh^2 + gv^2 + delta)]
/// with gh/gv from fixed 3x3 derivative filters.
class SmoothPoolScorer final : public FeatureScorer {
 public:
  explicit SmoothPoolScorer(ScorerSpec spec);
  SmoothPoolScorer(ScorerSpec spec, LinearHead head);
  int feature_count() const override { return 3; }

 protected:
  std::vector<double> compute_features(const Image& x) const override;
  GradientField weighted_gradient(const Image& x, const std::vector<double>& w) const override;
  std::shared_ptr<FeatureScorer> clone() const override;
};

/// One layer of seeded fixed 3x3 kernels, softplus activation, global average
/// pool per kernel, linear head.
class ConvScorer final : public FeatureScorer {
 public:
  explicit ConvScorer(ScorerSpec spec);
  ConvScorer(ScorerSpec spec, LinearHead head);
  int feature_count() const override { return spec_.kernel_count; }

  /// kernel weights, laid out [kernel][channel(3)][tap(9)]
  const std::vector<double>& kernels() const { return kernels_; }
  const std::vector<double>& biases() const { return biases_; }

 protected:
  std::vector<double> compute_features(const Image& x) const override;
  GradientField weighted_gradient(const Image& x, const std::vector<double>& w) const override;
  std::shared_ptr<FeatureScorer> clone() const override;

 private:
  void init_kernels();
  std::vector<double> kernels_;
  std::vector<double> biases_;
};

/// Softplus of 8x8 block-DCT band energies, band = coefficient diagonal
/// u+v bucketed into kernel_count groups.
class BandEnergyScorer final : public FeatureScorer {
 public:
  explicit BandEnergyScorer(ScorerSpec spec);
  BandEnergyScorer(ScorerSpec spec, LinearHead head);
  int feature_count() const override { return spec_.kernel_count; }
  int band_of(int u, int v) const;

 protected:
  std::vector<double> compute_features(const Image& x) const override;
  GradientField weighted_gradient(const Image& x, const std::vector<double>& w) const override;
  std::shared_ptr<FeatureScorer> clone() const override;
};

FeatureScorerPtr build_scorer(const ScorerSpec& spec);

/// Refit the linear head by closed-form ridge regression of pooled features
/// against the labels. Columns are standardized for the solve so the uniform
/// penalty (intercept included) acts evenly across feature scales; with
/// fewer samples than parameters the Gram form is solved, which at
/// lambda = 0 yields the minimum-norm interpolant in standardized space.
FeatureScorerPtr calibrate_scorer(const FeatureScorer& model,
                                  const std::vector<Image>& images,
                                  const std::vector<double>& labels,
                                  double lambda = 1e-3);

struct SingularSystemError : std::runtime_error {
  explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// JSON document schema: {kind, seed, hyperparameters, head, score_range, name}.
std::string scorer_to_json(const FeatureScorer& model);
FeatureScorerPtr scorer_from_json(const std::string& text);
void save_scorer(const FeatureScorer& model, const std::string& path);
FeatureScorerPtr load_scorer(const std::string& path);

}  // namespace sega
