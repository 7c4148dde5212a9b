#pragma once

#include <vector>

#include "sega/models.hpp"
#include "sega/perceptual.hpp"
#include "sega/smoothing.hpp"
#include "sega/tensor.hpp"

namespace sega {

/// Eq-as-written vs prose semantics for the magnitude filter:
/// literal keeps grad >= alpha, absolute keeps |grad| >= alpha (default),
/// relative keeps |grad| >= alpha * max|grad|.
enum class MaskMode { absolute, literal, relative };

enum class DirectionPolicy { auto_threshold, force_increase, force_decrease };
enum class Direction { increase, decrease };

std::string to_string(MaskMode m);
MaskMode mask_mode_from_string(const std::string& s);
std::string to_string(DirectionPolicy p);
DirectionPolicy direction_policy_from_string(const std::string& s);
std::string to_string(Direction d);

struct AttackConfig {
  double epsilon = 0.03;  // attack strength on the [0,1] scale
  double alpha = 0.02;    // magnitude-mask threshold
  MaskMode mask_mode = MaskMode::absolute;
  DirectionPolicy direction = DirectionPolicy::auto_threshold;
  double tau = 50.0;  // auto-threshold split point on the score scale
  bool use_smoothing = true;
  bool use_magnitude_mask = true;
  bool use_jnd_mask = true;
  SmoothingConfig smoothing;
  JndParams jnd;
};

void validate(const AttackConfig& cfg);

/// Binary field; elements are exactly 0.0 or 1.0.
using Mask = Tensor;

Mask magnitude_mask(const GradientField& grad, double alpha, MaskMode mode);

/// mask_j = [JND_j >= epsilon], broadcast from the spatial map across
/// `channels` interleaved channels.
Mask jnd_mask(const Tensor& jnd, double epsilon, int channels);

/// Black-box surrogate for the target-score branch: mean source score above
/// tau means the image already rates high, so the attack pushes down.
/// Exactly tau breaks toward increase.
Direction choose_direction(const std::vector<ModelPtr>& sources, const Image& x,
                           DirectionPolicy policy, double tau);

struct AttackResult {
  Image adversarial;
  GradientField delta;  // applied signed perturbation, pre-clamp
  Mask mask_magnitude;  // all-ones when the filter is disabled
  Mask mask_jnd;
  Direction direction = Direction::increase;
  long forward_passes = 0;
  std::vector<double> source_shift;  // white-box score(adv) - score(clean) per source
};

/// The signed ensemble Gaussian attack: smoothed ensembled gradient, both
/// filter masks, signed epsilon step, clamp to the valid pixel range.
/// Masks are computed on the unclamped gradient; the forward-pass count is
/// the K*m gradient evaluations.
AttackResult sega_attack(const std::vector<ModelPtr>& sources, const Image& x,
                         const AttackConfig& cfg);

/// Single-source one-step sign attack on the raw gradient, unmasked.
AttackResult fgsm_attack(const ScoringModel& source, const Image& x, double epsilon,
                         Direction direction);

/// Mean of per-source one-step sign perturbations (the simple ensemble
/// strategy baseline).
AttackResult averaged_ensemble_attack(const std::vector<ModelPtr>& sources, const Image& x,
                                      double epsilon, Direction direction);

}  // namespace sega
