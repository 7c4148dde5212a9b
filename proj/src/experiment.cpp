#include "sega/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace sega {

std::string to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::sega: return "sega";
    case AttackMethod::fgsm: return "fgsm";
    case AttackMethod::avg_ensemble: return "avg-ensemble";
  }
  throw std::invalid_argument("to_string: unknown attack method");
}

AttackMethod attack_method_from_string(const std::string& s) {
  if (s == "sega") return AttackMethod::sega;
  if (s == "fgsm") return AttackMethod::fgsm;
  if (s == "avg-ensemble") return AttackMethod::avg_ensemble;
  throw ConfigError("unknown attack method: " + s);
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.corpus.seed = cfg.seed;
  ScorerSpec pool_a{ScorerKind::smooth_pool, 101, 6, 3, 1e-6, "pool_a"};
  ScorerSpec conv_a{ScorerKind::conv, 312, 12, 3, 1e-6, "conv_a"};
  ScorerSpec band_a{ScorerKind::band_energy, 303, 4, 3, 1e-6, "band_a"};
  ScorerSpec conv_b{ScorerKind::conv, 256, 12, 3, 1e-6, "conv_b"};
  cfg.zoo = {pool_a, conv_a, band_a, conv_b};
  cfg.target = "conv_a";
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.schema_version != 1) throw ConfigError("unsupported schema_version");
  validate(cfg.corpus);
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
    throw ConfigError("train_fraction must be in (0,1)");
  if (cfg.zoo.size() < 2) throw ConfigError("zoo needs at least two scorers");
  bool found = false;
  for (const ScorerSpec& s : cfg.zoo) found = found || s.display_name() == cfg.target;
  if (!found) throw ConfigError("target model '" + cfg.target + "' not in zoo");
  if (cfg.bounds.hi <= cfg.bounds.lo) throw ConfigError("invalid metric bounds");
  if (cfg.ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");
  try {
    validate(cfg.attack);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

nlohmann::ordered_json attack_to_json(const AttackConfig& a) {
  return {{"epsilon", a.epsilon},
          {"alpha", a.alpha},
          {"mask_mode", to_string(a.mask_mode)},
          {"direction", to_string(a.direction)},
          {"tau", a.tau},
          {"use_smoothing", a.use_smoothing},
          {"use_magnitude_mask", a.use_magnitude_mask},
          {"use_jnd_mask", a.use_jnd_mask},
          {"sigma", a.smoothing.sigma},
          {"m", a.smoothing.samples},
          {"shared_noise", a.smoothing.shared_noise}};
}

void attack_from_json(const nlohmann::json& j, AttackConfig& a) {
  a.epsilon = j.value("epsilon", a.epsilon);
  a.alpha = j.value("alpha", a.alpha);
  if (j.contains("mask_mode")) a.mask_mode = mask_mode_from_string(j.at("mask_mode"));
  if (j.contains("direction"))
    a.direction = direction_policy_from_string(j.at("direction"));
  a.tau = j.value("tau", a.tau);
  a.use_smoothing = j.value("use_smoothing", a.use_smoothing);
  a.use_magnitude_mask = j.value("use_magnitude_mask", a.use_magnitude_mask);
  a.use_jnd_mask = j.value("use_jnd_mask", a.use_jnd_mask);
  a.smoothing.sigma = j.value("sigma", a.smoothing.sigma);
  a.smoothing.samples = j.value("m", a.smoothing.samples);
  a.smoothing.shared_noise = j.value("shared_noise", a.smoothing.shared_noise);
}

nlohmann::ordered_json corpus_to_json(const CorpusSpec& c) {
  std::vector<std::string> patterns, distortions;
  for (PatternKind p : c.patterns) patterns.push_back(to_string(p));
  for (DistortionKind d : c.distortions) distortions.push_back(to_string(d));
  return {{"height", c.height},
          {"width", c.width},
          {"channels", c.channels},
          {"patterns", patterns},
          {"distortions", distortions},
          {"levels", c.levels},
          {"variants_per_pattern", c.variants_per_pattern},
          {"kappa_noise", c.kappa_noise},
          {"kappa_blur", c.kappa_blur},
          {"noise_scale", c.noise_scale},
          {"seed", c.seed}};
}

void corpus_from_json(const nlohmann::json& j, CorpusSpec& c) {
  c.height = j.value("height", c.height);
  c.width = j.value("width", c.width);
  c.channels = j.value("channels", c.channels);
  if (j.contains("patterns")) {
    c.patterns.clear();
    for (const auto& s : j.at("patterns")) c.patterns.push_back(pattern_from_string(s));
  }
  if (j.contains("distortions")) {
    c.distortions.clear();
    for (const auto& s : j.at("distortions"))
      c.distortions.push_back(distortion_from_string(s));
  }
  if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<double>>();
  c.variants_per_pattern = j.value("variants_per_pattern", c.variants_per_pattern);
  c.kappa_noise = j.value("kappa_noise", c.kappa_noise);
  c.kappa_blur = j.value("kappa_blur", c.kappa_blur);
  c.noise_scale = j.value("noise_scale", c.noise_scale);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
}

nlohmann::ordered_json jnd_to_json(const JndParams& p) {
  return {{"t0", p.t0},         {"gamma", p.gamma},     {"slope", p.slope},
          {"texture_gain", p.texture_gain}, {"overlap", p.overlap}, {"window", p.window}};
}

void jnd_from_json(const nlohmann::json& j, JndParams& p) {
  p.t0 = j.value("t0", p.t0);
  p.gamma = j.value("gamma", p.gamma);
  p.slope = j.value("slope", p.slope);
  p.texture_gain = j.value("texture_gain", p.texture_gain);
  p.overlap = j.value("overlap", p.overlap);
  p.window = j.value("window", p.window);
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["corpus"] = corpus_to_json(cfg.corpus);
  j["train_fraction"] = cfg.train_fraction;
  auto zoo = nlohmann::ordered_json::array();
  for (const ScorerSpec& s : cfg.zoo)
    zoo.push_back({{"name", s.display_name()},
                   {"kind", to_string(s.kind)},
                   {"seed", s.seed},
                   {"kernel_count", s.kernel_count},
                   {"kernel_size", s.kernel_size},
                   {"delta", s.delta}});
  j["zoo"] = zoo;
  j["target"] = cfg.target;
  j["method"] = to_string(cfg.method);
  j["attack"] = attack_to_json(cfg.attack);
  j["jnd"] = jnd_to_json(cfg.attack.jnd);
  j["metrics"] = {{"beta_lo", cfg.bounds.lo}, {"beta_hi", cfg.bounds.hi}};
  j["ridge_lambda"] = cfg.ridge_lambda;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig cfg = default_config();
  try {
    cfg.schema_version = j.value("schema_version", 1);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.corpus.seed = cfg.seed;
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("corpus")) corpus_from_json(j.at("corpus"), cfg.corpus);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    if (j.contains("zoo")) {
      cfg.zoo.clear();
      for (const auto& e : j.at("zoo")) {
        ScorerSpec s;
        s.kind = scorer_kind_from_string(e.at("kind"));
        s.seed = e.at("seed").get<std::uint64_t>();
        s.kernel_count = e.value("kernel_count", s.kernel_count);
        s.kernel_size = e.value("kernel_size", s.kernel_size);
        s.delta = e.value("delta", s.delta);
        s.name = e.value("name", std::string());
        cfg.zoo.push_back(s);
      }
    }
    cfg.target = j.value("target", cfg.target);
    if (j.contains("method")) cfg.method = attack_method_from_string(j.at("method"));
    if (j.contains("attack")) attack_from_json(j.at("attack"), cfg.attack);
    if (j.contains("jnd")) jnd_from_json(j.at("jnd"), cfg.attack.jnd);
    if (j.contains("metrics")) {
      cfg.bounds.lo = j.at("metrics").value("beta_lo", cfg.bounds.lo);
      cfg.bounds.hi = j.at("metrics").value("beta_hi", cfg.bounds.hi);
    }
    cfg.ridge_lambda = j.value("ridge_lambda", cfg.ridge_lambda);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("config not found: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json(text);
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& image_id) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (unsigned char ch : image_id) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  Rng rng(master ^ h);
  return rng.next_u64();
}

// ---------------------------------------------------------------------------
// In-memory pipeline
// ---------------------------------------------------------------------------

CalibratedZoo build_calibrated_zoo(const ExperimentConfig& cfg,
                                   const std::vector<LabeledImage>& train) {
  std::vector<Image> images;
  std::vector<double> labels;
  images.reserve(train.size());
  for (const LabeledImage& item : train) {
    images.push_back(item.image);
    labels.push_back(item.mos);
  }
  CalibratedZoo zoo;
  for (const ScorerSpec& spec : cfg.zoo) {
    FeatureScorerPtr model = build_scorer(spec);
    model = calibrate_scorer(*model, images, labels, cfg.ridge_lambda);
    zoo.models.push_back(model);
    if (model->name() == cfg.target)
      zoo.target = model;
    else
      zoo.sources.push_back(model);
  }
  if (!zoo.target) throw ConfigError("target model '" + cfg.target + "' not in zoo");
  if (zoo.sources.empty()) throw ConfigError("no source models left after target holdout");
  return zoo;
}

AttackResult attack_image(const CalibratedZoo& zoo, const Image& x,
                          const ExperimentConfig& cfg, std::uint64_t image_seed) {
  switch (cfg.method) {
    case AttackMethod::sega: {
      AttackConfig attack = cfg.attack;
      attack.smoothing.seed = image_seed;
      return sega_attack(zoo.sources, x, attack);
    }
    case AttackMethod::fgsm: {
      const std::vector<ModelPtr> lone{zoo.sources.front()};
      const Direction dir = choose_direction(lone, x, cfg.attack.direction, cfg.attack.tau);
      return fgsm_attack(*zoo.sources.front(), x, cfg.attack.epsilon, dir);
    }
    case AttackMethod::avg_ensemble: {
      const Direction dir =
          choose_direction(zoo.sources, x, cfg.attack.direction, cfg.attack.tau);
      return averaged_ensemble_attack(zoo.sources, x, cfg.attack.epsilon, dir);
    }
  }
  throw std::invalid_argument("attack_image: unknown method");
}

std::vector<AttackResult> attack_batch(const CalibratedZoo& zoo,
                                       const std::vector<LabeledImage>& images,
                                       const ExperimentConfig& cfg) {
  std::vector<AttackResult> results;
  results.reserve(images.size());
  for (const LabeledImage& item : images)
    results.push_back(attack_image(zoo, item.image, cfg, derive_seed(cfg.seed, item.id)));
  return results;
}

EvalReport evaluate_batch(const ScoringModel& target, const std::vector<LabeledImage>& test,
                          const std::vector<AttackResult>& results,
                          const ExperimentConfig& cfg) {
  if (test.size() != results.size())
    throw std::invalid_argument("evaluate_batch: batch size mismatch");
  std::vector<ScorePair> pairs;
  std::vector<PerceptualReport> bundles;
  pairs.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    pairs.push_back({test[i].id, target.score(test[i].image),
                     target.score(results[i].adversarial)});
    bundles.push_back(perceptual_report(test[i].image, results[i].adversarial));
  }
  EvalMeta meta;
  meta.target = target.name();
  meta.method = to_string(cfg.method);
  meta.seed = cfg.seed;
  meta.forward_passes_per_image = results.empty() ? 0 : results.front().forward_passes;
  meta.config = attack_to_json(cfg.attack).dump();
  for (const ScorerSpec& s : cfg.zoo)
    if (s.display_name() != cfg.target) meta.sources.push_back(s.display_name());
  return build_report(pairs, bundles, std::move(meta), cfg.bounds.hi, cfg.bounds.lo);
}

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  validate(cfg);
  PipelineResult out;
  const std::vector<LabeledImage> corpus = generate_corpus(cfg.corpus);
  std::tie(out.train, out.test) = split_corpus(corpus, cfg.train_fraction, cfg.seed);
  out.zoo = build_calibrated_zoo(cfg, out.train);
  out.attacks = attack_batch(out.zoo, out.test, cfg);
  out.report = evaluate_batch(*out.zoo.target, out.test, out.attacks, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// Disk commands
// ---------------------------------------------------------------------------

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path);
  out << text;
  if (!out) throw IoError("short write to " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("missing input: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

void run_dataset(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::string corpus_dir = cfg.out_dir + "/corpus";
  ensure_dir(corpus_dir);
  const std::vector<LabeledImage> corpus = generate_corpus(cfg.corpus);
  auto [train, test] = split_corpus(corpus, cfg.train_fraction, cfg.seed);

  // images first, manifest last: a failed run leaves no manifest behind
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  auto emit = [&](const std::vector<LabeledImage>& part, const char* split) {
    for (const LabeledImage& item : part) {
      const std::string file = item.id + ".ppm";
      write_ppm(corpus_dir + "/" + file, item.image);
      items.push_back({{"id", item.id},
                       {"file", file},
                       {"mos", item.mos},
                       {"pattern", to_string(item.pattern)},
                       {"distortion", to_string(item.distortion)},
                       {"level", item.level},
                       {"variant", item.variant},
                       {"split", split}});
    }
  };
  emit(train, "train");
  emit(test, "test");

  nlohmann::ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["seed"] = cfg.seed;
  manifest["corpus"] = corpus_to_json(cfg.corpus);
  manifest["train_fraction"] = cfg.train_fraction;
  manifest["items"] = items;
  write_text(corpus_dir + "/manifest.json", manifest.dump(2) + "\n");
}

std::vector<LabeledImage> load_corpus(const std::string& corpus_dir,
                                      const std::string& split) {
  const auto manifest = nlohmann::json::parse(read_text(corpus_dir + "/manifest.json"));
  std::vector<LabeledImage> out;
  for (const auto& e : manifest.at("items")) {
    if (!split.empty() && e.at("split").get<std::string>() != split) continue;
    LabeledImage item;
    item.id = e.at("id").get<std::string>();
    item.image = read_ppm(corpus_dir + "/" + e.at("file").get<std::string>());
    item.mos = e.at("mos").get<double>();
    item.pattern = pattern_from_string(e.at("pattern").get<std::string>());
    item.distortion = distortion_from_string(e.at("distortion").get<std::string>());
    item.level = e.at("level").get<double>();
    item.variant = e.at("variant").get<int>();
    out.push_back(std::move(item));
  }
  return out;
}

void run_calibrate(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::string corpus_dir = cfg.out_dir + "/corpus";
  const std::string scorer_dir = cfg.out_dir + "/scorers";
  const std::vector<LabeledImage> train = load_corpus(corpus_dir, "train");
  const std::vector<LabeledImage> test = load_corpus(corpus_dir, "test");
  if (train.empty() || test.empty())
    throw MissingInputError("corpus has an empty split: " + corpus_dir);
  ensure_dir(scorer_dir);
  const CalibratedZoo zoo = build_calibrated_zoo(cfg, train);

  auto rank_agreement = [](const ScoringModel& model, const std::vector<LabeledImage>& part) {
    std::vector<ScorePair> pairs;
    pairs.reserve(part.size());
    for (const LabeledImage& item : part)
      pairs.push_back({item.id, item.mos, model.score(item.image)});
    return srocc(pairs);
  };

  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const FeatureScorerPtr& model : zoo.models) {
    save_scorer(*model, scorer_dir + "/" + model->name() + ".json");
    summary.push_back({{"model", model->name()},
                       {"srocc_train", rank_agreement(*model, train)},
                       {"srocc_test", rank_agreement(*model, test)}});
  }
  write_text(scorer_dir + "/calibration.json",
             nlohmann::ordered_json{{"models", summary}}.dump(2) + "\n");
}

namespace {

CalibratedZoo load_calibrated_zoo(const ExperimentConfig& cfg) {
  const std::string scorer_dir = cfg.out_dir + "/scorers";
  CalibratedZoo zoo;
  for (const ScorerSpec& spec : cfg.zoo) {
    const std::string path = scorer_dir + "/" + spec.display_name() + ".json";
    FeatureScorerPtr model = load_scorer(path);
    zoo.models.push_back(model);
    if (model->name() == cfg.target)
      zoo.target = model;
    else
      zoo.sources.push_back(model);
  }
  if (!zoo.target) throw ConfigError("target model '" + cfg.target + "' not in zoo");
  if (zoo.sources.empty()) throw ConfigError("no source models left after target holdout");
  return zoo;
}

}  // namespace

void run_attack(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::vector<LabeledImage> test = load_corpus(cfg.out_dir + "/corpus", "test");
  if (test.empty()) throw MissingInputError("empty test split");
  const CalibratedZoo zoo = load_calibrated_zoo(cfg);
  const std::string attack_dir = cfg.out_dir + "/attacks/" + to_string(cfg.method);
  ensure_dir(attack_dir);

  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  long forward = 0;
  for (const LabeledImage& item : test) {
    const AttackResult result =
        attack_image(zoo, item.image, cfg, derive_seed(cfg.seed, item.id));
    write_segt(attack_dir + "/" + item.id + "_adv.segt", result.adversarial);
    write_segt(attack_dir + "/" + item.id + "_delta.segt", result.delta);
    write_segt(attack_dir + "/" + item.id + "_maskf.segt", result.mask_magnitude);
    write_segt(attack_dir + "/" + item.id + "_maskj.segt", result.mask_jnd);
    write_ppm(attack_dir + "/" + item.id + "_adv.ppm", result.adversarial);
    nlohmann::ordered_json meta{{"id", item.id},
                                {"direction", to_string(result.direction)},
                                {"forward_passes", result.forward_passes},
                                {"source_shift", result.source_shift}};
    write_text(attack_dir + "/" + item.id + ".json", meta.dump(2) + "\n");
    items.push_back(meta);
    forward = result.forward_passes;
  }

  nlohmann::ordered_json summary;
  summary["method"] = to_string(cfg.method);
  summary["target"] = cfg.target;
  std::vector<std::string> sources;
  for (const ModelPtr& m : zoo.sources) sources.push_back(m->name());
  summary["sources"] = sources;
  summary["forward_passes_per_image"] = forward;
  summary["n_images"] = test.size();
  summary["attack"] = attack_to_json(cfg.attack);
  summary["items"] = items;
  write_text(attack_dir + "/summary.json", summary.dump(2) + "\n");
}

EvalReport run_eval(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::vector<LabeledImage> test = load_corpus(cfg.out_dir + "/corpus", "test");
  const std::string attack_dir = cfg.out_dir + "/attacks/" + to_string(cfg.method);
  const auto summary = nlohmann::json::parse(read_text(attack_dir + "/summary.json"));
  const CalibratedZoo zoo = load_calibrated_zoo(cfg);

  std::vector<ScorePair> pairs;
  std::vector<PerceptualReport> bundles;
  for (const LabeledImage& item : test) {
    const std::string adv_path = attack_dir + "/" + item.id + "_adv.segt";
    if (!fs::exists(adv_path)) throw MissingInputError("missing attack artifact: " + adv_path);
    const Image adv = read_segt(adv_path);
    pairs.push_back({item.id, zoo.target->score(item.image), zoo.target->score(adv)});
    bundles.push_back(perceptual_report(item.image, adv));
  }

  EvalMeta meta;
  meta.target = cfg.target;
  for (const ModelPtr& m : zoo.sources) meta.sources.push_back(m->name());
  meta.method = summary.at("method").get<std::string>();
  meta.seed = cfg.seed;
  meta.forward_passes_per_image = summary.at("forward_passes_per_image").get<long>();
  meta.config = attack_to_json(cfg.attack).dump();
  const EvalReport report =
      build_report(pairs, bundles, std::move(meta), cfg.bounds.hi, cfg.bounds.lo);

  const std::string report_dir = cfg.out_dir + "/reports";
  ensure_dir(report_dir);
  write_text(report_dir + "/eval_" + to_string(cfg.method) + ".json", report_to_json(report));
  write_text(report_dir + "/eval_" + to_string(cfg.method) + ".csv", report_to_csv(report));
  return report;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

double max_gradient_rel_error(const ScoringModel& model, const Image& probe, double step) {
  const GradientField analytic = model.gradient(probe);
  Image x = probe;
  double worst = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    const double keep = x.data[j];
    x.data[j] = keep + step;
    const double hi = model.score(x);
    x.data[j] = keep - step;
    const double lo = model.score(x);
    x.data[j] = keep;
    const double fd = (hi - lo) / (2.0 * step);
    const double rel = std::abs(analytic.data[j] - fd) / (std::abs(analytic.data[j]) + 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

namespace {

Image uniform_probe(std::uint64_t seed, int h, int w, int c) {
  Image img(h, w, c);
  Rng rng(seed);
  for (double& v : img.data) v = rng.next_uniform(0.05, 0.95);
  return img;
}

// Probes for the finite-difference suite live on a coarse intensity grid:
// derivative-filter responses then stay clear of the sqrt(delta)
// neighborhood, whose third derivative would otherwise dominate the
// central-difference truncation error at step 1e-4.
Image quantized_probe(std::uint64_t seed, int h, int w, int c) {
  Image img(h, w, c);
  Rng rng(seed);
  for (double& v : img.data) v = (1.0 + rng.next_below(3)) / 4.0;
  return img;
}

/// Deliberately wrong gradient (scaled), used to prove the verifier notices.
class CorruptedGradientModel final : public ScoringModel {
 public:
  explicit CorruptedGradientModel(ModelPtr inner)
      : inner_(std::move(inner)), name_(inner_->name() + "+fault") {}
  const std::string& name() const override { return name_; }
  ScoreRange range() const override { return inner_->range(); }
  double score(const Image& x) const override { return inner_->score(x); }
  GradientField gradient(const Image& x) const override {
    GradientField g = inner_->gradient(x);
    for (double& v : g.data) v *= 1.01;
    return g;
  }

 private:
  ModelPtr inner_;
  std::string name_;
};

}  // namespace

VerificationReport run_verify(const ExperimentConfig& cfg, bool inject_gradient_fault,
                              int mc_samples) {
  validate(cfg);
  VerificationReport report;
  const std::uint64_t seed = cfg.seed;

  // Freshly built zoo: the gradient code under test is independent of head
  // values, and uncalibrated heads keep score magnitudes friendly to finite
  // differences.
  std::vector<ModelPtr> zoo;
  for (const ScorerSpec& spec : cfg.zoo) zoo.push_back(build_scorer(spec));
  if (inject_gradient_fault && !zoo.empty())
    zoo[0] = std::make_shared<CorruptedGradientModel>(zoo[0]);

  bool all = true;

  // 1. gradient fidelity: exhaustive central differences on seeded probes
  for (const ModelPtr& model : zoo) {
    GradientCheckRow row;
    row.model = model->name();
    for (int p = 0; p < 20; ++p) {
      const Image probe = quantized_probe(0xBEEFull + p, 8, 8, 3);
      row.max_rel_err = std::max(row.max_rel_err, max_gradient_rel_error(*model, probe));
    }
    row.pass = row.max_rel_err <= 1e-4;
    all = all && row.pass;
    report.gradient_checks.push_back(row);
  }

  // 2. expected norm: closed form against Monte Carlo
  for (const int d : {1, 2, 3, 3072}) {
    ExpectedNormRow row;
    row.d = d;
    row.closed_form = expected_norm(d);
    double acc = 0.0;
    for (int i = 0; i < mc_samples; ++i) {
      Rng rng(RngStream{seed ^ 0xE0E0ull, static_cast<std::uint32_t>(d),
                        static_cast<std::uint64_t>(i)});
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        const double u = rng.next_normal();
        s += u * u;
      }
      acc += std::sqrt(s);
    }
    row.monte_carlo = acc / mc_samples;
    row.rel_err = std::abs(row.monte_carlo - row.closed_form) / row.closed_form;
    row.pass = row.rel_err <= 0.015;
    all = all && row.pass;
    report.expected_norm_rows.push_back(row);
  }

  // 3. theorem 1 on the quadratic oracle: gap = sigma^2, quartering per halving
  {
    const QuadraticModel quad;
    const Image x(1, 1, 1, 0.5);
    report.theorem1_quadratic =
        theorem1_check(quad, x, {0.2, 0.1, 0.05}, mc_samples, seed ^ 0x71ull);
    double worst = 0.0;
    bool ratios_ok = true;
    const auto& rows = report.theorem1_quadratic.rows;
    for (const Theorem1Row& row : rows)
      worst = std::max(worst, std::abs(row.gap - row.sigma * row.sigma) /
                                  (row.sigma * row.sigma));
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const double ratio = rows[i].gap / rows[i + 1].gap;
      ratios_ok = ratios_ok && ratio >= 3.4 && ratio <= 4.6;
    }
    report.quadratic_gap_rel_err = worst;
    report.quadratic_pass = worst <= 0.10 && ratios_ok && report.theorem1_quadratic.pass;
    all = all && report.quadratic_pass;
  }

  // 3b. theorem 1 on a zoo model (bound envelope only)
  {
    const Image x = uniform_probe(seed ^ 0x7100ull, 16, 16, 3);
    report.theorem1_zoo =
        theorem1_check(*zoo.front(), x, {0.1, 0.05, 0.025}, 2000, seed ^ 0x72ull);
    all = all && report.theorem1_zoo.pass;
  }

  // 4. theorem 2 scenarios
  {
    SmoothingConfig smoothing = cfg.attack.smoothing;
    smoothing.seed = seed ^ 0x720ull;

    // (a) sources = {target}: the score-gap term vanishes
    const Image x32 = uniform_probe(seed ^ 0x7200ull, 32, 32, 3);
    ModelPtr target = zoo.back();
    report.theorem2_self = theorem2_check({target}, *target, x32, smoothing);
    all = all && report.theorem2_self.pass;

    // (b) all-linear: gradients are constant, so L = 0 exactly
    {
      const int h = 8, w = 8, c = 3;
      GradientField wh = sample_gaussian(RngStream{seed ^ 0x7201ull, 0, 0}, h, w, c);
      for (double& v : wh.data) v *= 0.01;
      auto target_lin = std::make_shared<LinearModel>("lin_h", wh, 50.0);
      std::vector<ModelPtr> sources;
      for (int k = 0; k < 2; ++k) {
        GradientField wk = wh;
        GradientField noise =
            sample_gaussian(RngStream{seed ^ 0x7202ull, static_cast<std::uint32_t>(k), 0},
                            h, w, c);
        for (int j = 0; j < wk.size(); ++j) wk.data[j] += 0.005 * noise.data[j];
        sources.push_back(std::make_shared<LinearModel>("lin_f" + std::to_string(k), wk,
                                                        50.0 + (k == 0 ? 2.0 : -1.0)));
      }
      report.theorem2_linear = theorem2_check(sources, *target_lin,
                                              uniform_probe(seed ^ 0x7203ull, h, w, c),
                                              smoothing);
      all = all && report.theorem2_linear.pass;
    }

    // (c) source triple against the held-out target
    {
      std::vector<ModelPtr> sources;
      ModelPtr held_out;
      for (const ModelPtr& m : zoo) {
        if (m->name() == cfg.target)
          held_out = m;
        else if (sources.size() < 3)
          sources.push_back(m);
      }
      if (!held_out) held_out = zoo.front();
      report.theorem2_zoo = theorem2_check(sources, *held_out, x32, smoothing);
      all = all && report.theorem2_zoo.pass;
    }
  }

  report.all_pass = all;

  std::error_code ec;
  fs::create_directories(cfg.out_dir + "/verify", ec);
  if (!ec)
    write_text(cfg.out_dir + "/verify/verification.json", verification_to_json(report));
  return report;
}

namespace {

nlohmann::ordered_json theorem1_to_json(const Theorem1Report& r) {
  auto rows = nlohmann::ordered_json::array();
  for (const Theorem1Row& row : r.rows)
    rows.push_back({{"sigma", row.sigma},
                    {"gap", row.gap},
                    {"bound", row.bound},
                    {"mc_stderr", row.mc_stderr},
                    {"violation", row.violation}});
  return {{"lipschitz", r.lipschitz}, {"rows", rows}, {"pass", r.pass}};
}

nlohmann::ordered_json bound_to_json(const BoundReport& r) {
  return {{"L", r.lipschitz},       {"C", r.score_gap}, {"d", r.dimension},
          {"sigma", r.sigma},       {"bound", r.bound}, {"observed", r.observed},
          {"mc_stderr", r.mc_stderr}, {"pass", r.pass}};
}

}  // namespace

std::string verification_to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  auto grad = nlohmann::ordered_json::array();
  for (const GradientCheckRow& row : report.gradient_checks)
    grad.push_back({{"model", row.model}, {"max_rel_err", row.max_rel_err}, {"pass", row.pass}});
  j["gradient_checks"] = grad;
  auto norms = nlohmann::ordered_json::array();
  for (const ExpectedNormRow& row : report.expected_norm_rows)
    norms.push_back({{"d", row.d},
                     {"closed_form", row.closed_form},
                     {"monte_carlo", row.monte_carlo},
                     {"rel_err", row.rel_err},
                     {"pass", row.pass}});
  j["expected_norm"] = norms;
  j["theorem1_quadratic"] = theorem1_to_json(report.theorem1_quadratic);
  j["theorem1_quadratic_gap_rel_err"] = report.quadratic_gap_rel_err;
  j["theorem1_quadratic_pass"] = report.quadratic_pass;
  j["theorem1_zoo"] = theorem1_to_json(report.theorem1_zoo);
  j["theorem2_self"] = bound_to_json(report.theorem2_self);
  j["theorem2_linear"] = bound_to_json(report.theorem2_linear);
  j["theorem2_zoo"] = bound_to_json(report.theorem2_zoo);
  j["all_pass"] = report.all_pass;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::string& axis) {
  validate(cfg);
  const std::vector<LabeledImage> corpus = generate_corpus(cfg.corpus);
  auto [train, test] = split_corpus(corpus, cfg.train_fraction, cfg.seed);
  const CalibratedZoo zoo = build_calibrated_zoo(cfg, train);

  struct Point {
    std::string value;
    ExperimentConfig cfg;
    std::vector<ModelPtr> sources;
  };
  std::vector<Point> points;
  auto numeric = [](double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
  };

  if (axis == "sigma") {
    for (const double s : {2.0, 5.0, 10.0, 25.0, 50.0}) {
      Point p{numeric(s) + "/255", cfg, zoo.sources};
      p.cfg.attack.smoothing.sigma = s / 255.0;
      points.push_back(std::move(p));
    }
  } else if (axis == "m") {
    for (const int m : {1, 5, 10, 20}) {
      Point p{std::to_string(m), cfg, zoo.sources};
      p.cfg.attack.smoothing.samples = m;
      points.push_back(std::move(p));
    }
  } else if (axis == "K") {
    for (std::size_t k = 1; k <= zoo.sources.size(); ++k) {
      Point p{std::to_string(k), cfg, {zoo.sources.begin(), zoo.sources.begin() + k}};
      points.push_back(std::move(p));
    }
  } else if (axis == "alpha") {
    for (const double a : {0.0, 0.005, 0.01, 0.02, 0.04, 0.08}) {
      Point p{numeric(a), cfg, zoo.sources};
      p.cfg.attack.alpha = a;
      points.push_back(std::move(p));
    }
  } else if (axis == "masks") {
    const struct {
      const char* label;
      bool magnitude, jnd;
    } combos[] = {{"none", false, false},
                  {"magnitude", true, false},
                  {"jnd", false, true},
                  {"both", true, true}};
    for (const auto& combo : combos) {
      Point p{combo.label, cfg, zoo.sources};
      p.cfg.attack.use_magnitude_mask = combo.magnitude;
      p.cfg.attack.use_jnd_mask = combo.jnd;
      points.push_back(std::move(p));
    }
  } else {
    throw ConfigError("unknown ablation axis: " + axis);
  }

  std::vector<AblationRow> rows;
  for (const Point& point : points) {
    CalibratedZoo sub = zoo;
    sub.sources = point.sources;
    const std::vector<AttackResult> results = attack_batch(sub, test, point.cfg);
    AblationRow row{axis, point.value,
                    evaluate_batch(*zoo.target, test, results, point.cfg)};
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_to_csv(const std::vector<AblationRow>& rows) {
  auto cell = [](const std::optional<double>& v) {
    if (!v.has_value()) return std::string("na");
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
  };
  std::ostringstream os;
  os.precision(17);
  os << "axis,value,mae,r,srocc,plcc,krocc,ssim,l1,l2,linf,forward_passes\n";
  for (const AblationRow& row : rows) {
    const EvalReport& r = row.report;
    os << row.axis << "," << row.value << "," << r.metrics.mae << "," << r.metrics.r << ","
       << cell(r.metrics.srocc) << "," << cell(r.metrics.plcc) << ","
       << cell(r.metrics.krocc) << "," << r.perceptual.ssim << "," << r.perceptual.l1 << ","
       << r.perceptual.l2 << "," << r.perceptual.linf << ","
       << r.meta.forward_passes_per_image << "\n";
  }
  return os.str();
}

}  // namespace sega
