// Drives the installed binary end to end through std::system.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "sega/eval.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SEGA_CLI_PATH;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("sega_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string write_small_config(const fs::path& dir) {
  // two pattern variants keep the corpus at 80 images; m=3 keeps runs quick
  const std::string path = (dir / "config.json").string();
  std::ofstream out(path);
  out << R"({
  "schema_version": 1,
  "seed": 7,
  "out_dir": ")" << (dir / "run").string() << R"(",
  "corpus": {"variants_per_pattern": 2},
  "attack": {"m": 3}
})";
  return path;
}

}  // namespace

TEST_CASE("cli pipeline: dataset -> calibrate -> attack -> eval -> verify") {
  const TempDir tmp("pipe");
  const std::string config = write_small_config(tmp.path);
  const std::string base = " --config " + config;
  const std::string out = (tmp.path / "run").string();

  REQUIRE(run("dataset" + base) == 0);
  CHECK(fs::exists(out + "/corpus/manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(out + "/corpus/manifest.json"));
  int train_n = 0, test_n = 0;
  for (const auto& item : manifest.at("items"))
    (item.at("split") == "train" ? train_n : test_n)++;
  CHECK(train_n == 64);
  CHECK(test_n == 16);

  // rerunning the dataset command reproduces the manifest byte for byte
  const std::string manifest_bytes = slurp(out + "/corpus/manifest.json");
  REQUIRE(run("dataset" + base) == 0);
  CHECK(slurp(out + "/corpus/manifest.json") == manifest_bytes);

  REQUIRE(run("calibrate" + base) == 0);
  CHECK(fs::exists(out + "/scorers/conv_a.json"));
  CHECK(fs::exists(out + "/scorers/calibration.json"));

  REQUIRE(run("attack" + base) == 0);
  const auto summary = nlohmann::json::parse(slurp(out + "/attacks/sega/summary.json"));
  CHECK(summary.at("forward_passes_per_image").get<long>() == 9);  // K=3, m=3
  CHECK(summary.at("items").size() == 16);

  REQUIRE(run("eval" + base) == 0);
  const sega::EvalReport report =
      sega::report_from_json(slurp(out + "/reports/eval_sega.json"));
  CHECK(report.meta.forward_passes_per_image == 9);
  CHECK(sega::report_to_csv(report) == slurp(out + "/reports/eval_sega.csv"));

  // fgsm needs one forward pass
  REQUIRE(run("attack --method fgsm" + base) == 0);
  const auto fgsm_summary =
      nlohmann::json::parse(slurp(out + "/attacks/fgsm/summary.json"));
  CHECK(fgsm_summary.at("forward_passes_per_image").get<long>() == 1);
  REQUIRE(run("eval --method fgsm" + base) == 0);

  REQUIRE(run("report " + out + "/reports/eval_sega.json " + out +
              "/reports/eval_fgsm.json") == 0);

  REQUIRE(run("ablate --axis masks" + base) == 0);
  const std::string csv = slurp(out + "/ablate/masks.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  // rerunning the sigma ablation reproduces the CSV byte for byte
  REQUIRE(run("ablate --axis K" + base) == 0);
  const std::string k_csv = slurp(out + "/ablate/K.csv");
  REQUIRE(run("ablate --axis K" + base) == 0);
  CHECK(slurp(out + "/ablate/K.csv") == k_csv);

  REQUIRE(run("verify --mc-samples 4000" + base) == 0);
  CHECK(fs::exists(out + "/verify/verification.json"));
  CHECK(run("verify --mc-samples 4000 --inject-gradient-fault" + base) == 4);
}

TEST_CASE("cli exit codes distinguish failure classes") {
  const TempDir tmp("codes");
  const std::string config = write_small_config(tmp.path);

  // missing inputs: attack without corpus or scorers
  CHECK(run("attack --config " + config) == 3);
  CHECK(run("eval --config " + config) == 3);
  CHECK(run("calibrate --config " + config) == 3);

  // config errors
  const std::string bad = (tmp.path / "bad.json").string();
  {
    std::ofstream out(bad);
    out << "{\"target\": \"ghost\"}";
  }
  CHECK(run("dataset --config " + bad) == 2);
  CHECK(run("dataset --config " + (tmp.path / "absent.json").string()) == 3);
  CHECK(run("attack --method bogus --config " + config) == 2);
}

TEST_CASE("dataset write failure leaves no partial manifest") {
  const TempDir tmp("ro");
  const std::string config = write_small_config(tmp.path);
  const fs::path ro_dir = tmp.path / "ro";
  fs::create_directories(ro_dir);
  fs::permissions(ro_dir, fs::perms::owner_read | fs::perms::owner_exec,
                  fs::perm_options::replace);
  const int code = run("dataset --config " + config + " --out " + ro_dir.string());
  CHECK(code != 0);
  CHECK_FALSE(fs::exists(ro_dir / "corpus/manifest.json"));
  fs::permissions(ro_dir, fs::perms::owner_all, fs::perm_options::replace);
}
