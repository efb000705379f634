#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return VCML_CLI_PATH; }

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "vcml_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string command = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli: synth then evaluate end to end") {
  const auto dir = work_dir() / "flow";
  fs::remove_all(dir);
  const auto data = (dir / "data").string();
  REQUIRE(run("synth --n 300 --seed 3 --out-dir " + data) == 0);
  CHECK(fs::exists(dir / "data" / "profiles.jsonl"));
  CHECK(fs::exists(dir / "data" / "embeddings.jsonl"));
  CHECK(fs::exists(dir / "data" / "synth_manifest.json"));

  json config;
  config["profiles"] = (dir / "data" / "profiles.jsonl").string();
  config["embedding_cache"] = (dir / "data" / "embeddings.jsonl").string();
  config["output_dir"] = (dir / "eval").string();
  config["mode"] = "fv+tsd";
  config["text_kind"] = "doc_embedding";
  config["classifier"] = "elastic_net";
  config["classifier_params"] = {{"lambda", 0.1}, {"l1_ratio", 0.1}, {"tolerance", 1e-3}};
  config["n_repeats"] = 2;
  config["master_seed"] = 11;
  const auto config_path = dir / "run.json";
  std::ofstream(config_path) << config.dump(2);

  REQUIRE(run("evaluate --config " + config_path.string() + " --write-predictions") == 0);
  CHECK(fs::exists(dir / "eval" / "report.json"));
  CHECK(fs::exists(dir / "eval" / "report.csv"));
  CHECK(fs::exists(dir / "eval" / "predictions.csv"));

  const auto report = json::parse(slurp(dir / "eval" / "report.json"));
  CHECK(report["n_repeats"] == 2);
  CHECK(report["summary"].contains("auroc"));

  SUBCASE("same seed reproduces the report byte for byte") {
    const auto first = slurp(dir / "eval" / "report.json");
    json config2 = config;
    config2["output_dir"] = (dir / "eval2").string();
    const auto config2_path = dir / "run2.json";
    std::ofstream(config2_path) << config2.dump(2);
    REQUIRE(run("evaluate --config " + config2_path.string()) == 0);
    CHECK(slurp(dir / "eval2" / "report.json") == first);
  }

  SUBCASE("fv ablation evaluates and mcnemar compares the two prediction files") {
    json fv_config = config;
    fv_config["mode"] = "fv";
    fv_config["output_dir"] = (dir / "eval_fv").string();
    const auto fv_path = dir / "run_fv.json";
    std::ofstream(fv_path) << fv_config.dump(2);
    REQUIRE(run("evaluate --config " + fv_path.string() + " --write-predictions") == 0);

    const int code = run("mcnemar --pred-a " + (dir / "eval" / "predictions.csv").string() +
                         " --pred-b " + (dir / "eval_fv" / "predictions.csv").string() +
                         " --out-dir " + (dir / "mc").string());
    CHECK(code == 0);
    const auto mc = json::parse(slurp(dir / "mc" / "mcnemar.json"));
    CHECK(mc["chi2"].get<double>() >= 0.0);
  }

  SUBCASE("featurize exports matrix, layout, labels") {
    json feat_config = config;
    feat_config["output_dir"] = (dir / "feat").string();
    const auto feat_path = dir / "run_feat.json";
    std::ofstream(feat_path) << feat_config.dump(2);
    REQUIRE(run("featurize --config " + feat_path.string()) == 0);
    CHECK(fs::exists(dir / "feat" / "features.csv"));
    const auto layout = json::parse(slurp(dir / "feat" / "layout.json"));
    bool has_tsd = false;
    for (const auto& block : layout["blocks"]) {
      if (block["name"] == "TSD") has_tsd = true;
    }
    CHECK(has_tsd);
  }

  SUBCASE("explain writes per-block attributions and a ranking") {
    json ex_config = config;
    ex_config["output_dir"] = (dir / "explain").string();
    const auto ex_path = dir / "run_explain.json";
    std::ofstream(ex_path) << ex_config.dump(2);
    REQUIRE(run("explain --config " + ex_path.string() + " --rows 3 --n-samples 60") == 0);
    const auto summary = json::parse(slurp(dir / "explain" / "shap_summary.json"));
    CHECK(summary["importance"].is_array());
    CHECK(summary["importance"].size() > 0);
  }
}

TEST_CASE("cli: config validation failures exit 2 and name the key") {
  const auto dir = work_dir() / "bad";
  fs::remove_all(dir);
  fs::create_directories(dir);
  json config;
  config["output_dir"] = (dir / "out").string();
  const auto config_path = dir / "bad.json";
  std::ofstream(config_path) << config.dump(2);

  const std::string command = std::string(cli_path()) + " evaluate --config " +
                              config_path.string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(command.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(slurp(dir / "stderr.txt").find("profiles") != std::string::npos);
}

TEST_CASE("cli: unknown subcommand exits 2") {
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("cli: fast acceptance subset runs green") {
  const auto dir = work_dir() / "accept";
  fs::remove_all(dir);
  CHECK(run("accept --only 1 --only 2 --only 9 --out-dir " + (dir).string()) == 0);
  const auto report = json::parse(slurp(dir / "acceptance.json"));
  CHECK(report["all_passed"] == true);
  CHECK(report["criteria"].size() == 3);
}
