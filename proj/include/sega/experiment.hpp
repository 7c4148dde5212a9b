#pragma once

#include <string>
#include <vector>

#include "sega/attack.hpp"
#include "sega/dataset.hpp"
#include "sega/eval.hpp"
#include "sega/models.hpp"
#include "sega/smoothing.hpp"

namespace sega {

enum class AttackMethod { sega, fgsm, avg_ensemble };
std::string to_string(AttackMethod m);
AttackMethod attack_method_from_string(const std::string& s);

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MetricBounds {
  double lo = 0.0;
  double hi = 100.0;
};

/// One experiment: corpus, scorer zoo, target rotation, attack and metric
/// settings, all hanging off a single master seed. Serialized as one JSON
/// document with a schema_version field.
struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 7;
  std::string out_dir = "runs/default";
  CorpusSpec corpus;
  double train_fraction = 0.8;
  std::vector<ScorerSpec> zoo;
  std::string target;
  AttackMethod method = AttackMethod::sega;
  AttackConfig attack;
  MetricBounds bounds;
  double ridge_lambda = 1e-3;
};

/// Four-scorer zoo with conv_a held out as the default target; the other
/// three are the source ensemble.
ExperimentConfig default_config();

void validate(const ExperimentConfig& cfg);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Stable per-image seed so batch order and parallelism cannot change any
/// perturbation.
std::uint64_t derive_seed(std::uint64_t master, const std::string& image_id);

// ---------------------------------------------------------------------------
// In-memory pipeline
// ---------------------------------------------------------------------------

struct CalibratedZoo {
  std::vector<FeatureScorerPtr> models;  // order matches config.zoo
  FeatureScorerPtr target;
  std::vector<ModelPtr> sources;  // zoo minus target
};

CalibratedZoo build_calibrated_zoo(const ExperimentConfig& cfg,
                                   const std::vector<LabeledImage>& train);

/// Attack one image with the configured method. The smoothing seed is the
/// per-image derived seed; fgsm uses the first source only.
AttackResult attack_image(const CalibratedZoo& zoo, const Image& x,
                          const ExperimentConfig& cfg, std::uint64_t image_seed);

std::vector<AttackResult> attack_batch(const CalibratedZoo& zoo,
                                       const std::vector<LabeledImage>& images,
                                       const ExperimentConfig& cfg);

EvalReport evaluate_batch(const ScoringModel& target, const std::vector<LabeledImage>& test,
                          const std::vector<AttackResult>& results,
                          const ExperimentConfig& cfg);

struct PipelineResult {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
  CalibratedZoo zoo;
  std::vector<AttackResult> attacks;  // aligned with test
  EvalReport report;
};

/// dataset -> calibrate -> attack -> eval without touching the disk.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Disk commands (the CLI front-ends)
// ---------------------------------------------------------------------------

struct MissingInputError : std::runtime_error {
  explicit MissingInputError(const std::string& what) : std::runtime_error(what) {}
};

/// corpus/<id>.ppm files plus corpus/manifest.json. The manifest is written
/// last, so a failed run leaves no partial manifest behind.
void run_dataset(const ExperimentConfig& cfg);

/// scorers/<name>.json per zoo entry plus scorers/calibration.json with
/// train/test rank agreement against pseudo-MOS.
void run_calibrate(const ExperimentConfig& cfg);

/// attacks/<method>/ per-image artifacts (adversarial image, perturbation
/// and masks as SEGT, PPM preview, metadata JSON) plus summary.json.
void run_attack(const ExperimentConfig& cfg);

/// reports/eval_<method>.json and .csv over the test split.
EvalReport run_eval(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Max over all coordinates of |analytic - central difference| /
/// (|analytic| + 1e-8); the finite-difference side uses only score().
double max_gradient_rel_error(const ScoringModel& model, const Image& probe,
                              double step = 1e-4);

struct GradientCheckRow {
  std::string model;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct ExpectedNormRow {
  int d = 0;
  double closed_form = 0.0;
  double monte_carlo = 0.0;
  double rel_err = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<GradientCheckRow> gradient_checks;
  std::vector<ExpectedNormRow> expected_norm_rows;
  Theorem1Report theorem1_quadratic;
  double quadratic_gap_rel_err = 0.0;  // worst |gap - sigma^2| / sigma^2
  bool quadratic_pass = false;
  Theorem1Report theorem1_zoo;
  BoundReport theorem2_self;    // sources = {target}
  BoundReport theorem2_linear;  // all-linear scenario
  BoundReport theorem2_zoo;     // default source triple vs held-out target
  bool all_pass = false;
};

/// Runs the gradient finite-difference suite, the expected-norm Monte Carlo
/// cross-check, and both theorem verifiers. `inject_gradient_fault` corrupts
/// one model's gradient on purpose (fault-injection hook for testing the
/// failure path). Writes verify/verification.json when out_dir is usable.
VerificationReport run_verify(const ExperimentConfig& cfg, bool inject_gradient_fault = false,
                              int mc_samples = 100000);

std::string verification_to_json(const VerificationReport& report);

// ---------------------------------------------------------------------------
// Ablation sweeps
// ---------------------------------------------------------------------------

struct AblationRow {
  std::string axis;
  std::string value;
  EvalReport report;
};

/// axis in {sigma, m, K, alpha, masks}; one eval row per grid point.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::string& axis);

std::string ablation_to_csv(const std::vector<AblationRow>& rows);

/// Reads corpus/manifest.json back into labeled images (split == "train" or
/// "test"; empty selects everything).
std::vector<LabeledImage> load_corpus(const std::string& corpus_dir,
                                      const std::string& split = "");

}  // namespace sega
