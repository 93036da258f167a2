#include "qsense/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qsense/defense.hpp"
#include "qsense/rng.hpp"
#include "qsense/simulator.hpp"
#include "qsense/version.hpp"

namespace qsense {

namespace {

namespace fs = std::filesystem;

// Simulation results are bit-identical at any thread count, so parallelism
// here never affects outputs.
int cli_threads() {
  return static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
}

// Shortest-exact decimal form; deterministic across runs and platforms.
std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

nlohmann::json read_json(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + ": " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + " parse failure in " + path.string() + ": " +
                      e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

// Result files carry enough provenance to reproduce or refuse stale input.
nlohmann::json provenance(const ExperimentConfig& config,
                          const DeviceModel& device) {
  return {{"version", kVersion},
          {"device_hash", device.hash_hex()},
          {"seed", config.seed},
          {"config", config.to_json()}};
}

struct StoredReferences {
  ReferenceSet references;
  std::string device_hash;
  uint64_t pooled_shots = 0;
};

nlohmann::json references_to_json(const ExperimentConfig& config,
                                  const DeviceModel& device,
                                  const ReferenceSet& references) {
  nlohmann::json j = provenance(config, device);
  const Signature& first = references.begin()->second;
  j["victims"] = first.victims;
  j["adversary"] = first.adversary;
  j["repetitions"] = first.repetitions;
  j["shots_per_rep"] = first.shots_per_rep;
  j["batches"] =
      plan_batches(references.size() * first.repetitions);
  nlohmann::json sigs = nlohmann::json::object();
  for (const auto& [label, sig] : references)
    sigs[label] = {{"zeros", sig.zeros},
                   {"ones", sig.ones},
                   {"p0", sig.distribution.p0},
                   {"p1", sig.distribution.p1}};
  j["signatures"] = std::move(sigs);
  return j;
}

StoredReferences references_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kAllowed = {
      "version", "device_hash", "seed",          "config",
      "victims", "adversary",   "repetitions",   "shots_per_rep",
      "batches", "signatures",  "separability"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kAllowed.count(key))
      throw DataMismatchError("unknown field \"" + key +
                              "\" in references file");
  }
  try {
    StoredReferences stored;
    stored.device_hash = j.at("device_hash").get<std::string>();
    const auto victims = j.at("victims").get<std::vector<int>>();
    if (victims.empty() || victims.size() > 16)
      throw DataMismatchError("references file victim count out of range");
    const int adversary = j.at("adversary").get<int>();
    const uint64_t repetitions = j.at("repetitions").get<uint64_t>();
    const uint64_t shots = j.at("shots_per_rep").get<uint64_t>();
    stored.pooled_shots = repetitions * shots;
    for (const auto& [label, entry] : j.at("signatures").items()) {
      Signature sig;
      sig.adversary = adversary;
      sig.victims = victims;
      sig.label = label;
      sig.zeros = entry.at("zeros").get<uint64_t>();
      sig.ones = entry.at("ones").get<uint64_t>();
      if (sig.zeros + sig.ones != stored.pooled_shots)
        throw DataMismatchError("signature \"" + label +
                                "\" counts do not match the pooled shots");
      sig.distribution =
          stats::BinaryDistribution::from_counts(sig.zeros, sig.ones);
      sig.repetitions = repetitions;
      sig.shots_per_rep = shots;
      stored.references.emplace(label, std::move(sig));
    }
    if (stored.references.size() != (1u << victims.size()))
      throw DataMismatchError("references file does not cover every label");
    return stored;
  } catch (const nlohmann::json::exception& e) {
    throw DataMismatchError(std::string("references format error: ") +
                            e.what());
  }
}

nlohmann::json separability_to_json(const SeparabilityReport& report) {
  nlohmann::json pairwise = nlohmann::json::array();
  for (const auto& row : report.pairwise) pairwise.push_back(row);
  nlohmann::json overlapping = nlohmann::json::array();
  for (const auto& [a, b] : report.overlapping)
    overlapping.push_back({a, b});
  return {{"labels", report.labels},
          {"pairwise", std::move(pairwise)},
          {"floor", report.floor},
          {"floor_constant", report.floor_constant},
          {"feasible", report.feasible},
          {"overlapping", std::move(overlapping)}};
}

nlohmann::json trials_to_json(const AttackReport& report) {
  nlohmann::json tests = nlohmann::json::array();
  for (const AttackTrial& t : report.trials) {
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [label, score] : t.scores) scores[label] = score;
    tests.push_back({{"circuit_seed", t.circuit_seed},
                     {"depth", t.depth},
                     {"truth", *t.truth},
                     {"predicted", t.predicted},
                     {"scores", std::move(scores)},
                     {"delta_jsd", t.delta_jsd}});
  }
  return tests;
}

std::string delta_csv(const AttackReport& report) {
  std::string csv = "test,circuit_seed,depth,truth,predicted,delta_jsd\n";
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    const AttackTrial& t = report.trials[i];
    csv += std::to_string(i) + "," + std::to_string(t.circuit_seed) + "," +
           std::to_string(t.depth) + "," + *t.truth + "," + t.predicted + "," +
           format_double(t.delta_jsd) + "\n";
  }
  return csv;
}

fs::path ensure_out_dir(const ExperimentConfig& config) {
  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  return dir;
}

}  // namespace

void ExperimentConfig::apply_json(const nlohmann::json& j) {
  static const std::set<std::string> kAllowed = {
      "device", "victims", "adversary", "shots",   "repetitions",
      "n_tests", "rb_depth", "seed",     "defense"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kAllowed.count(key))
      throw ConfigError("unknown field \"" + key + "\" in config");
  }
  try {
    if (j.contains("device")) device = j.at("device").get<std::string>();
    if (j.contains("victims")) victims = j.at("victims").get<std::vector<int>>();
    if (j.contains("adversary")) adversary = j.at("adversary").get<int>();
    if (j.contains("shots")) shots = j.at("shots").get<uint64_t>();
    if (j.contains("repetitions"))
      repetitions = j.at("repetitions").get<uint64_t>();
    if (j.contains("n_tests")) n_tests = j.at("n_tests").get<uint64_t>();
    if (j.contains("rb_depth")) {
      const auto range = j.at("rb_depth").get<std::vector<int>>();
      if (range.size() != 2)
        throw ConfigError("rb_depth must be [min, max]");
      rb_depth = {range[0], range[1]};
    }
    if (j.contains("seed")) seed = j.at("seed").get<uint64_t>();
    if (j.contains("defense")) defense = j.at("defense").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config format error: ") + e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"device", device},
          {"victims", victims},
          {"adversary", adversary},
          {"shots", shots},
          {"repetitions", repetitions},
          {"n_tests", n_tests},
          {"rb_depth", {rb_depth.lo, rb_depth.hi}},
          {"seed", seed},
          {"defense", defense}};
}

void ExperimentConfig::validate(const DeviceModel& device_model) const {
  if (victims.empty()) throw ConfigError("victims: at least one qubit required");
  std::set<int> seen;
  for (int v : victims) {
    if (!device_model.has_qubit(v))
      throw ConfigError("victims: qubit " + std::to_string(v) +
                        " not on device \"" + device_model.name() + "\"");
    if (!seen.insert(v).second)
      throw ConfigError("victims: duplicate qubit " + std::to_string(v));
  }
  if (!device_model.has_qubit(adversary))
    throw ConfigError("adversary: qubit " + std::to_string(adversary) +
                      " not on device \"" + device_model.name() + "\"");
  if (seen.count(adversary))
    throw ConfigError("adversary: qubit " + std::to_string(adversary) +
                      " is also a victim");
  if (shots == 0) throw ConfigError("shots: must be >= 1");
  if (repetitions == 0) throw ConfigError("repetitions: must be >= 1");
  if (n_tests == 0) throw ConfigError("n_tests: must be >= 1");
  if (rb_depth.lo < 1 || rb_depth.hi < rb_depth.lo)
    throw ConfigError("rb_depth: need 1 <= min <= max");
}

DeviceModel resolve_device(const std::string& name_or_path) {
  if (fs::exists(name_or_path) || name_or_path.ends_with(".json"))
    return load_device(name_or_path);
  return preset(name_or_path);
}

int cmd_collect(const ExperimentConfig& config) {
  const DeviceModel device = resolve_device(config.device);
  config.validate(device);
  const fs::path dir = ensure_out_dir(config);

  const ReferenceSet references = collect_references(
      device, config.victims, config.adversary, config.repetitions,
      config.shots, derive_seed(config.seed, stream_label("reference")),
      cli_threads());

  nlohmann::json j = references_to_json(config, device, references);
  if (config.victims.size() >= 2) {
    const uint64_t pooled = config.repetitions * config.shots;
    j["separability"] = separability_to_json(separability(
        references, pooled, derive_seed(config.seed, stream_label("floor"))));
  }
  write_json(dir / "references.json", j);
  return 0;
}

int cmd_attack(const ExperimentConfig& config) {
  const DeviceModel device = resolve_device(config.device);
  config.validate(device);
  const fs::path dir = ensure_out_dir(config);

  const fs::path ref_path = dir / "references.json";
  if (!fs::exists(ref_path))
    throw ConfigError("no references.json in " + dir.string() +
                      " (run collect first)");
  const StoredReferences stored =
      references_from_json(read_json(ref_path, "references"));
  if (stored.device_hash != device.hash_hex())
    throw DataMismatchError("reference/device mismatch: references were "
                            "collected on a different device model");
  const Signature& first = stored.references.begin()->second;
  if (first.victims != config.victims || first.adversary != config.adversary)
    throw DataMismatchError(
        "references were collected for a different victim/adversary layout");

  const AttackReport report = run_attack_experiment(
      device, stored.references, config.n_tests, config.rb_depth, config.shots,
      derive_seed(config.seed, stream_label("test")), cli_threads());

  nlohmann::json j = provenance(config, device);
  j["summary"] = {{"accuracy", report.accuracy}, {"n_tests", report.n_tests}};
  j["tests"] = trials_to_json(report);
  write_json(dir / "attack_results.json", j);
  write_text(dir / "delta_jsd.csv", delta_csv(report));
  return 0;
}

int cmd_defend(const ExperimentConfig& config) {
  const DeviceModel device = resolve_device(config.device);
  config.validate(device);
  const fs::path dir = ensure_out_dir(config);

  const ReferenceSet references = collect_references(
      device, config.victims, config.adversary, config.repetitions,
      config.shots, derive_seed(config.seed, stream_label("reference")),
      cli_threads());

  // Defended and undefended arms share trial generation (same label-derived
  // streams), so the comparison is paired; defense=false collapses the
  // defended arm onto the undefended one.
  const AttackReport defended =
      attack_under_defense(device, references, config.n_tests, config.rb_depth,
                           config.shots, config.seed, config.defense,
                           cli_threads());
  const AttackReport undefended =
      attack_under_defense(device, references, config.n_tests, config.rb_depth,
                           config.shots, config.seed, false, cli_threads());

  constexpr int kFidelityCircuits = 40;
  const FidelityReport fidelity = fidelity_overhead(
      device,
      make_fidelity_test_set(device, config.victims.front(), kFidelityCircuits),
      config.shots, config.seed, cli_threads());

  nlohmann::json j = provenance(config, device);
  j["fidelity_with"] = fidelity.fidelity_with_flip;
  j["fidelity_without"] = fidelity.fidelity_without_flip;
  j["loss"] = fidelity.loss;
  j["loss_breakdown"] = {{"gate_error_est", fidelity.loss_gate_error_est},
                         {"relaxation_est", fidelity.loss_relaxation_est}};
  j["adversary_accuracy_defended"] = defended.accuracy;
  j["adversary_accuracy_undefended"] = undefended.accuracy;
  j["n_tests"] = config.n_tests;
  write_json(dir / "defense_report.json", j);
  return 0;
}

int cmd_report(const ExperimentConfig& config) {
  const fs::path dir(config.out);
  if (!fs::is_directory(dir))
    throw ConfigError("output directory not found: " + dir.string());

  bool found = false;
  const fs::path refs = dir / "references.json";
  if (fs::exists(refs)) {
    found = true;
    const nlohmann::json j = read_json(refs, "references");
    std::printf("references: %zu labels, %llu x %llu shots per label\n",
                j.at("signatures").size(),
                static_cast<unsigned long long>(j.at("repetitions").get<uint64_t>()),
                static_cast<unsigned long long>(j.at("shots_per_rep").get<uint64_t>()));
    if (j.contains("separability"))
      std::printf("separability: %s (floor %.6f)\n",
                  j.at("separability").at("feasible").get<bool>() ? "feasible"
                                                                  : "infeasible",
                  j.at("separability").at("floor").get<double>());
  }
  const fs::path attack = dir / "attack_results.json";
  if (fs::exists(attack)) {
    found = true;
    const nlohmann::json j = read_json(attack, "attack results");
    std::printf("attack: accuracy %.4f over %llu tests\n",
                j.at("summary").at("accuracy").get<double>(),
                static_cast<unsigned long long>(
                    j.at("summary").at("n_tests").get<uint64_t>()));
    // Re-render the per-test CSV from the stored results.
    AttackReport report;
    for (const auto& t : j.at("tests")) {
      AttackTrial trial;
      trial.circuit_seed = t.at("circuit_seed").get<uint64_t>();
      trial.depth = t.at("depth").get<int>();
      trial.truth = t.at("truth").get<std::string>();
      trial.predicted = t.at("predicted").get<std::string>();
      trial.delta_jsd = t.at("delta_jsd").get<double>();
      report.trials.push_back(std::move(trial));
    }
    write_text(dir / "delta_jsd.csv", delta_csv(report));
  }
  const fs::path defense = dir / "defense_report.json";
  if (fs::exists(defense)) {
    found = true;
    const nlohmann::json j = read_json(defense, "defense report");
    std::printf(
        "defense: fidelity loss %.6f; adversary accuracy %.4f defended, "
        "%.4f undefended\n",
        j.at("loss").get<double>(),
        j.at("adversary_accuracy_defended").get<double>(),
        j.at("adversary_accuracy_undefended").get<double>());
  }
  if (!found)
    throw ConfigError("no result files found in " + dir.string());
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  try {
    CLI::App app{"qubit-sensing side channel: simulate, attack, defend"};
    app.fallthrough(true);
    app.require_subcommand(1);

    ExperimentConfig flags;  // flag landing zone; merged by count below
    std::string config_path;
    app.add_option("--config", config_path, "experiment config JSON");
    app.add_option("--device", flags.device, "preset name or calibration file");
    app.add_option("--seed", flags.seed, "top-level random seed");
    app.add_option("--shots", flags.shots, "shots per circuit run");
    app.add_option("--reps", flags.repetitions, "reference repetitions per label");
    app.add_option("--tests", flags.n_tests, "number of attack test circuits");
    app.add_option("--victims", flags.victims, "victim qubit ids")
        ->delimiter(',');
    app.add_option("--adversary", flags.adversary, "adversary qubit id");
    app.add_flag("--defense,!--no-defense", flags.defense,
                 "enable output randomization in defend runs");
    app.add_option("--out", flags.out, "output directory");

    auto* collect = app.add_subcommand("collect", "collect reference signatures");
    auto* attack = app.add_subcommand("attack", "classify RB test circuits");
    auto* defend = app.add_subcommand("defend", "evaluate the countermeasure");
    auto* report = app.add_subcommand("report", "re-render stored results");

    std::vector<std::string> argv_storage = args;
    std::vector<const char*> argv = {"qsense"};
    for (const std::string& a : argv_storage) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }

    ExperimentConfig config;  // defaults
    if (!config_path.empty()) config.apply_json(read_json(config_path, "config"));
    if (app.count("--device")) config.device = flags.device;
    if (app.count("--seed")) config.seed = flags.seed;
    if (app.count("--shots")) config.shots = flags.shots;
    if (app.count("--reps")) config.repetitions = flags.repetitions;
    if (app.count("--tests")) config.n_tests = flags.n_tests;
    if (app.count("--victims")) config.victims = flags.victims;
    if (app.count("--adversary")) config.adversary = flags.adversary;
    if (app.count("--defense")) config.defense = flags.defense;
    if (app.count("--out")) config.out = flags.out;

    if (collect->parsed()) return cmd_collect(config);
    if (attack->parsed()) return cmd_attack(config);
    if (defend->parsed()) return cmd_defend(config);
    if (report->parsed()) return cmd_report(config);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataMismatchError& e) {
    std::cerr << "data mismatch: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace qsense
