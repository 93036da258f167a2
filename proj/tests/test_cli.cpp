#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsense/cli.hpp"

using namespace qsense;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qsense_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json load(const fs::path& path) {
  return nlohmann::json::parse(slurp(path));
}

int cli(std::vector<std::string> args) { return run_cli(args); }

}  // namespace

TEST_CASE("collect then attack then report compose through the out dir") {
  const fs::path dir = fresh_dir("compose");
  const std::vector<std::string> common = {
      "--victims", "0", "--adversary", "1", "--reps", "3",
      "--shots",  "512", "--seed",     "5", "--out",  dir.string()};
  auto with = [&](std::string sub, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {sub};
    args.insert(args.end(), common.begin(), common.end());
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  CHECK(with("collect") == 0);
  CHECK(fs::exists(dir / "references.json"));
  CHECK(with("attack", {"--tests", "10"}) == 0);
  CHECK(fs::exists(dir / "attack_results.json"));
  CHECK(fs::exists(dir / "delta_jsd.csv"));
  CHECK(with("report") == 0);

  const nlohmann::json results = load(dir / "attack_results.json");
  CHECK(results.at("summary").at("n_tests") == 10);
  CHECK(results.at("tests").size() == 10);
  const auto& first = results.at("tests").at(0);
  CHECK(first.contains("circuit_seed"));
  CHECK(first.contains("depth"));
  CHECK(first.contains("truth"));
  CHECK(first.contains("predicted"));
  CHECK(first.contains("scores"));
  CHECK(first.contains("delta_jsd"));
  const std::string csv = slurp(dir / "delta_jsd.csv");
  CHECK(csv.rfind("test,circuit_seed,depth,truth,predicted,delta_jsd\n", 0) ==
        0);
  fs::remove_all(dir);
}

TEST_CASE("attack before collect is a configuration error") {
  const fs::path dir = fresh_dir("noref");
  CHECK(cli({"attack", "--out", dir.string()}) == 2);
  fs::remove_all(dir);
}

TEST_CASE("reruns produce byte-identical result files") {
  const fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  for (const fs::path& dir : {d1, d2}) {
    CHECK(cli({"collect", "--reps", "3", "--shots", "512", "--seed", "11",
               "--out", dir.string()}) == 0);
    CHECK(cli({"attack", "--reps", "3", "--shots", "512", "--seed", "11",
               "--tests", "8", "--out", dir.string()}) == 0);
    CHECK(cli({"defend", "--reps", "2", "--shots", "512", "--seed", "11",
               "--tests", "8", "--out", dir.string()}) == 0);
  }
  for (const char* file : {"references.json", "attack_results.json",
                           "delta_jsd.csv", "defense_report.json"})
    REQUIRE(slurp(d1 / file) == slurp(d2 / file));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("references from another device model are refused") {
  const fs::path dir = fresh_dir("xdev");
  CHECK(cli({"collect", "--device", "linear5", "--reps", "2", "--shots",
             "256", "--out", dir.string()}) == 0);
  CHECK(cli({"attack", "--device", "tee5", "--reps", "2", "--shots", "256",
             "--out", dir.string()}) == 3);
  fs::remove_all(dir);
}

TEST_CASE("references for another victim layout are refused") {
  const fs::path dir = fresh_dir("xlayout");
  CHECK(cli({"collect", "--victims", "0", "--adversary", "1", "--reps", "2",
             "--shots", "256", "--out", dir.string()}) == 0);
  CHECK(cli({"attack", "--victims", "2", "--adversary", "1", "--reps", "2",
             "--shots", "256", "--out", dir.string()}) == 3);
  fs::remove_all(dir);
}

TEST_CASE("invalid experiment layouts exit with a config error") {
  CHECK(cli({"collect", "--adversary", "9", "--out", "x"}) == 2);
  CHECK(cli({"collect", "--victims", "0,0", "--adversary", "1", "--out",
             "x"}) == 2);
  CHECK(cli({"collect", "--victims", "0,1", "--adversary", "1", "--out",
             "x"}) == 2);
  CHECK(cli({"collect", "--device", "nope", "--out", "x"}) == 2);
  CHECK(cli({"collect", "--shots", "0", "--out", "x"}) == 2);
  CHECK(cli({"report", "--out", "definitely_missing_dir"}) == 2);
  CHECK(cli({"--out", "x"}) == 2);         // missing subcommand
  CHECK(cli({"collect", "--bogus"}) == 2);  // unknown flag
}

TEST_CASE("help exits cleanly") { CHECK(cli({"--help"}) == 0); }

TEST_CASE("flags override the config file, which overrides defaults") {
  const fs::path dir = fresh_dir("prec");
  fs::create_directories(dir);
  const fs::path cfg = dir / "exp.json";
  {
    std::ofstream out(cfg);
    out << R"({"seed": 7, "shots": 1024, "repetitions": 2, "victims": [2],
               "adversary": 3})";
  }
  CHECK(cli({"collect", "--config", cfg.string(), "--shots", "256", "--out",
             dir.string()}) == 0);
  const nlohmann::json refs = load(dir / "references.json");
  CHECK(refs.at("config").at("shots") == 256);        // flag wins
  CHECK(refs.at("config").at("seed") == 7);           // file wins over default
  CHECK(refs.at("config").at("victims") == nlohmann::json::array({2}));
  CHECK(refs.at("config").at("adversary") == 3);
  CHECK(refs.at("config").at("device") == "linear5");  // untouched default
  // The output directory is location-specific, so it is not embedded.
  CHECK_FALSE(refs.at("config").contains("out"));
  fs::remove_all(dir);
}

TEST_CASE("unknown config file keys are rejected") {
  const fs::path dir = fresh_dir("badcfg");
  fs::create_directories(dir);
  const fs::path cfg = dir / "exp.json";
  {
    std::ofstream out(cfg);
    out << R"({"seed": 7, "shotz": 1024})";
  }
  CHECK(cli({"collect", "--config", cfg.string(), "--out", dir.string()}) ==
        2);
  {
    std::ofstream out(cfg);
    out << R"({"rb_depth": [3, 3]})";
  }
  CHECK(cli({"collect", "--config", cfg.string(), "--reps", "2", "--shots",
             "256", "--out", dir.string()}) == 0);
  CHECK(cli({"attack", "--config", cfg.string(), "--reps", "2", "--shots",
             "256", "--tests", "5", "--out", dir.string()}) == 0);
  const nlohmann::json results = load(dir / "attack_results.json");
  for (const auto& t : results.at("tests")) CHECK(t.at("depth") == 3);
  fs::remove_all(dir);
}

TEST_CASE("defend writes the full overhead report") {
  const fs::path dir = fresh_dir("defend");
  CHECK(cli({"defend", "--reps", "2", "--shots", "512", "--tests", "20",
             "--seed", "3", "--out", dir.string()}) == 0);
  const nlohmann::json report = load(dir / "defense_report.json");
  for (const char* field :
       {"fidelity_with", "fidelity_without", "loss",
        "adversary_accuracy_defended", "adversary_accuracy_undefended"})
    REQUIRE(report.contains(field));
  CHECK(report.at("loss").get<double>() ==
        doctest::Approx(report.at("fidelity_without").get<double>() -
                        report.at("fidelity_with").get<double>())
            .epsilon(1e-15));
  // Masks on by default: the defended adversary does worse.
  CHECK(report.at("adversary_accuracy_defended").get<double>() <=
        report.at("adversary_accuracy_undefended").get<double>());
  fs::remove_all(dir);
}

TEST_CASE("defense flag can be disabled, equalizing the two arms") {
  const fs::path dir = fresh_dir("nodefense");
  CHECK(cli({"defend", "--no-defense", "--reps", "2", "--shots", "512",
             "--tests", "10", "--seed", "3", "--out", dir.string()}) == 0);
  const nlohmann::json report = load(dir / "defense_report.json");
  CHECK(report.at("adversary_accuracy_defended") ==
        report.at("adversary_accuracy_undefended"));
  CHECK(report.at("config").at("defense") == false);
  fs::remove_all(dir);
}

TEST_CASE("a calibration file path works anywhere a preset name does") {
  const fs::path dir = fresh_dir("calfile");
  CHECK(cli({"collect", "--device", "data/tee5.json", "--reps", "2",
             "--shots", "256", "--out", dir.string()}) == 0);
  const nlohmann::json refs = load(dir / "references.json");
  CHECK(refs.at("device_hash") == preset("tee5").hash_hex());
  fs::remove_all(dir);
}
