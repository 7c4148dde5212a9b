#include "sega/attack.hpp"

#include <cmath>

namespace sega {

std::string to_string(MaskMode m) {
  switch (m) {
    case MaskMode::absolute: return "absolute";
    case MaskMode::literal: return "literal";
    case MaskMode::relative: return "relative";
  }
  throw std::invalid_argument("to_string: unknown mask mode");
}

MaskMode mask_mode_from_string(const std::string& s) {
  if (s == "absolute") return MaskMode::absolute;
  if (s == "literal") return MaskMode::literal;
  if (s == "relative") return MaskMode::relative;
  throw std::invalid_argument("unknown mask mode: " + s);
}

std::string to_string(DirectionPolicy p) {
  switch (p) {
    case DirectionPolicy::auto_threshold: return "auto";
    case DirectionPolicy::force_increase: return "increase";
    case DirectionPolicy::force_decrease: return "decrease";
  }
  throw std::invalid_argument("to_string: unknown direction policy");
}

DirectionPolicy direction_policy_from_string(const std::string& s) {
  if (s == "auto") return DirectionPolicy::auto_threshold;
  if (s == "increase") return DirectionPolicy::force_increase;
  if (s == "decrease") return DirectionPolicy::force_decrease;
  throw std::invalid_argument("unknown direction policy: " + s);
}

std::string to_string(Direction d) {
  return d == Direction::increase ? "increase" : "decrease";
}

void validate(const AttackConfig& cfg) {
  if (cfg.epsilon <= 0.0) throw std::invalid_argument("AttackConfig: epsilon must be > 0");
  if (cfg.alpha < 0.0) throw std::invalid_argument("AttackConfig: alpha must be >= 0");
  if (cfg.use_smoothing) validate(cfg.smoothing);
  validate(cfg.jnd);
}

Mask magnitude_mask(const GradientField& grad, double alpha, MaskMode mode) {
  if (alpha < 0.0) throw std::invalid_argument("magnitude_mask: alpha must be >= 0");
  Mask mask(grad.height, grad.width, grad.channels);
  double threshold = alpha;
  if (mode == MaskMode::relative) threshold = alpha * lp_norm(grad, Norm::linf);
  for (int i = 0; i < grad.size(); ++i) {
    const double g = grad.data[i];
    const bool keep = mode == MaskMode::literal ? g >= alpha : std::abs(g) >= threshold;
    mask.data[i] = keep ? 1.0 : 0.0;
  }
  return mask;
}

Mask jnd_mask(const Tensor& jnd, double epsilon, int channels) {
  if (epsilon <= 0.0) throw std::invalid_argument("jnd_mask: epsilon must be > 0");
  if (jnd.channels != 1) throw std::invalid_argument("jnd_mask: expected an H x W x 1 map");
  Mask mask(jnd.height, jnd.width, channels);
  for (int y = 0; y < jnd.height; ++y)
    for (int x = 0; x < jnd.width; ++x) {
      const double keep = jnd.at(y, x, 0) >= epsilon ? 1.0 : 0.0;
      for (int c = 0; c < channels; ++c) mask.at(y, x, c) = keep;
    }
  return mask;
}

Direction choose_direction(const std::vector<ModelPtr>& sources, const Image& x,
                           DirectionPolicy policy, double tau) {
  switch (policy) {
    case DirectionPolicy::force_increase: return Direction::increase;
    case DirectionPolicy::force_decrease: return Direction::decrease;
    case DirectionPolicy::auto_threshold: break;
  }
  if (sources.empty()) throw std::invalid_argument("choose_direction: no sources");
  double mean = 0.0;
  for (const ModelPtr& m : sources) mean += m->score(x);
  mean /= static_cast<double>(sources.size());
  return mean > tau ? Direction::decrease : Direction::increase;
}

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Mask ones_like(const Image& x) { return Mask(x.height, x.width, x.channels, 1.0); }

AttackResult finish_attack(const std::vector<const ScoringModel*>& sources, const Image& x,
                           AttackResult result) {
  result.adversarial = x;
  for (int i = 0; i < x.size(); ++i) result.adversarial.data[i] += result.delta.data[i];
  result.adversarial = clamp_image(result.adversarial);
  result.source_shift.reserve(sources.size());
  for (const ScoringModel* m : sources)
    result.source_shift.push_back(m->score(result.adversarial) - m->score(x));
  return result;
}

std::vector<const ScoringModel*> raw_pointers(const std::vector<ModelPtr>& models) {
  std::vector<const ScoringModel*> out;
  out.reserve(models.size());
  for (const ModelPtr& m : models) out.push_back(m.get());
  return out;
}

}  // namespace

AttackResult sega_attack(const std::vector<ModelPtr>& sources, const Image& x,
                         const AttackConfig& cfg) {
  validate(cfg);
  if (sources.empty()) throw std::invalid_argument("sega_attack: no sources");

  const EnsembleGradient ens = cfg.use_smoothing
                                   ? ensemble_gradient(sources, x, cfg.smoothing)
                                   : ensemble_raw_gradient(sources, x);

  AttackResult result;
  result.mask_magnitude = cfg.use_magnitude_mask
                              ? magnitude_mask(ens.gradient, cfg.alpha, cfg.mask_mode)
                              : ones_like(x);
  result.mask_jnd = cfg.use_jnd_mask
                        ? jnd_mask(jnd_map(x, cfg.jnd), cfg.epsilon, x.channels)
                        : ones_like(x);
  result.direction = choose_direction(sources, x, cfg.direction, cfg.tau);
  result.forward_passes = ens.forward_passes;

  const double step = result.direction == Direction::decrease ? -cfg.epsilon : cfg.epsilon;
  result.delta = GradientField(x.height, x.width, x.channels);
  for (int i = 0; i < x.size(); ++i)
    result.delta.data[i] = result.mask_magnitude.data[i] * result.mask_jnd.data[i] * step *
                           sign_of(ens.gradient.data[i]);
  return finish_attack(raw_pointers(sources), x, std::move(result));
}

AttackResult fgsm_attack(const ScoringModel& source, const Image& x, double epsilon,
                         Direction direction) {
  if (epsilon <= 0.0) throw std::invalid_argument("fgsm_attack: epsilon must be > 0");
  const GradientField grad = source.gradient(x);
  AttackResult result;
  result.mask_magnitude = ones_like(x);
  result.mask_jnd = ones_like(x);
  result.direction = direction;
  result.forward_passes = 1;
  const double step = direction == Direction::decrease ? -epsilon : epsilon;
  result.delta = GradientField(x.height, x.width, x.channels);
  for (int i = 0; i < x.size(); ++i) result.delta.data[i] = step * sign_of(grad.data[i]);
  return finish_attack({&source}, x, std::move(result));
}

AttackResult averaged_ensemble_attack(const std::vector<ModelPtr>& sources, const Image& x,
                                      double epsilon, Direction direction) {
  if (sources.empty()) throw std::invalid_argument("averaged_ensemble_attack: no sources");
  if (epsilon <= 0.0)
    throw std::invalid_argument("averaged_ensemble_attack: epsilon must be > 0");
  AttackResult result;
  result.mask_magnitude = ones_like(x);
  result.mask_jnd = ones_like(x);
  result.direction = direction;
  result.forward_passes = static_cast<long>(sources.size());
  const double step = direction == Direction::decrease ? -epsilon : epsilon;
  result.delta = GradientField(x.height, x.width, x.channels);
  for (const ModelPtr& m : sources) {
    const GradientField grad = m->gradient(x);
    for (int i = 0; i < x.size(); ++i)
      result.delta.data[i] += step * sign_of(grad.data[i]);
  }
  for (double& v : result.delta.data) v /= static_cast<double>(sources.size());
  return finish_attack(raw_pointers(sources), x, std::move(result));
}

}  // namespace sega
