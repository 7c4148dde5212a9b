// Command-line front end: dataset generation, scorer calibration, attacks,
// evaluation, theorem verification and ablation sweeps, all driven by one
// JSON config and a master seed.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sega/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;         // generic / I-O failure
constexpr int kExitConfig = 2;        // bad config
constexpr int kExitMissingInput = 3;  // required artifact absent
constexpr int kExitVerifyFailed = 4;  // a verification check is red

void print_bound(const char* label, const sega::BoundReport& r) {
  std::cout << label << ": observed " << r.observed << " vs bound " << r.bound
            << " (L=" << r.lipschitz << ", C=" << r.score_gap << ", d=" << r.dimension
            << ") -> " << (r.pass ? "ok" : "VIOLATED") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sega: transfer-attack laboratory for no-reference image-quality scorers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string method;
  std::string direction;
  auto* config_opt = app.add_option("--config", config_path, "experiment config JSON");
  auto* seed_opt = app.add_option("--seed", seed, "master seed override");
  auto* out_opt = app.add_option("--out", out_dir, "output directory override");
  auto* method_opt =
      app.add_option("--method", method, "attack method: sega|fgsm|avg-ensemble");
  auto* direction_opt =
      app.add_option("--direction", direction, "direction policy: auto|increase|decrease");

  auto* cmd_dataset = app.add_subcommand("dataset", "generate the corpus and manifest");
  auto* cmd_calibrate = app.add_subcommand("calibrate", "fit scorer heads on the train split");
  auto* cmd_attack = app.add_subcommand("attack", "attack the test split");
  auto* cmd_eval = app.add_subcommand("eval", "score before/after and emit the report");
  auto* cmd_verify = app.add_subcommand("verify", "gradient, expectation and bound checks");
  auto* cmd_ablate = app.add_subcommand("ablate", "sweep one axis and emit a CSV");
  auto* cmd_report = app.add_subcommand("report", "combine eval JSONs into one CSV table");

  bool inject_fault = false;
  int mc_samples = 100000;
  cmd_verify->add_flag("--inject-gradient-fault", inject_fault,
                       "corrupt one gradient on purpose (fault-injection hook)");
  cmd_verify->add_option("--mc-samples", mc_samples, "Monte-Carlo sample count");

  std::string axis = "sigma";
  cmd_ablate->add_option("--axis", axis, "sigma|m|K|alpha|masks")->required();

  std::vector<std::string> report_paths;
  cmd_report->add_option("paths", report_paths, "eval report JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    sega::ExperimentConfig cfg =
        config_opt->count() ? sega::load_config(config_path) : sega::default_config();
    if (seed_opt->count()) {
      cfg.seed = seed;
      cfg.corpus.seed = seed;
    }
    if (out_opt->count()) cfg.out_dir = out_dir;
    if (method_opt->count()) cfg.method = sega::attack_method_from_string(method);
    if (direction_opt->count())
      cfg.attack.direction = sega::direction_policy_from_string(direction);
    sega::validate(cfg);

    if (cmd_dataset->parsed()) {
      sega::run_dataset(cfg);
      std::cout << "corpus written to " << cfg.out_dir << "/corpus\n";
    } else if (cmd_calibrate->parsed()) {
      sega::run_calibrate(cfg);
      std::cout << "scorers written to " << cfg.out_dir << "/scorers\n";
    } else if (cmd_attack->parsed()) {
      sega::run_attack(cfg);
      std::cout << "attack artifacts written to " << cfg.out_dir << "/attacks/"
                << sega::to_string(cfg.method) << "\n";
    } else if (cmd_eval->parsed()) {
      const sega::EvalReport report = sega::run_eval(cfg);
      std::cout << sega::report_to_csv(report);
    } else if (cmd_verify->parsed()) {
      const sega::VerificationReport report =
          sega::run_verify(cfg, inject_fault, mc_samples);
      for (const sega::GradientCheckRow& row : report.gradient_checks)
        std::cout << "gradient " << row.model << ": max rel err " << row.max_rel_err
                  << " -> " << (row.pass ? "ok" : "FAILED") << "\n";
      for (const sega::ExpectedNormRow& row : report.expected_norm_rows)
        std::cout << "expected_norm d=" << row.d << ": " << row.closed_form << " vs MC "
                  << row.monte_carlo << " (rel err " << row.rel_err << ") -> "
                  << (row.pass ? "ok" : "FAILED") << "\n";
      std::cout << "smoothing limit (quadratic): worst gap rel err "
                << report.quadratic_gap_rel_err << " -> "
                << (report.quadratic_pass ? "ok" : "FAILED") << "\n";
      print_bound("bound self", report.theorem2_self);
      print_bound("bound linear", report.theorem2_linear);
      print_bound("bound zoo", report.theorem2_zoo);
      if (!report.all_pass) {
        std::cout << "verification FAILED\n";
        return kExitVerifyFailed;
      }
      std::cout << "verification passed\n";
    } else if (cmd_ablate->parsed()) {
      const std::vector<sega::AblationRow> rows = sega::run_ablation(cfg, axis);
      const std::string csv = sega::ablation_to_csv(rows);
      std::filesystem::create_directories(cfg.out_dir + "/ablate");
      std::ofstream out(cfg.out_dir + "/ablate/" + axis + ".csv", std::ios::trunc);
      out << csv;
      std::cout << csv;
    } else if (cmd_report->parsed()) {
      std::cout << "label,mae,r,srocc,plcc,krocc,ssim,l1,l2,linf,forward_passes\n";
      for (const std::string& path : report_paths) {
        std::ifstream in(path);
        if (!in) throw sega::MissingInputError("missing report: " + path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        const sega::EvalReport report = sega::report_from_json(text);
        const std::string csv = sega::report_to_csv(report);
        // second line of the two-line CSV, prefixed with the file stem
        const std::string row = csv.substr(csv.find('\n') + 1);
        std::cout << std::filesystem::path(path).stem().string() << "," << row;
      }
    }
  } catch (const sega::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sega::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
