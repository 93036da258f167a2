#include "qsense/attack.hpp"

#include <algorithm>
#include <cmath>

#include "qsense/circuit.hpp"
#include "qsense/rng.hpp"

namespace qsense {

namespace {

std::string label_for(uint32_t index, std::size_t k) {
  std::string label(k, '0');
  for (std::size_t i = 0; i < k; ++i)
    if (index & (1u << (k - 1 - i))) label[i] = '1';
  return label;
}

std::vector<int> states_for(const std::string& label) {
  std::vector<int> states(label.size());
  for (std::size_t i = 0; i < label.size(); ++i) states[i] = label[i] == '1';
  return states;
}

// Victim/adversary layout shared by every signature of a reference set.
struct Layout {
  std::vector<int> victims;
  int adversary;
};

Layout layout_of(const ReferenceSet& references) {
  if (references.size() < 2)
    throw ConfigError("need at least two reference labels");
  const Signature& first = references.begin()->second;
  for (const auto& [label, sig] : references) {
    if (sig.victims != first.victims || sig.adversary != first.adversary)
      throw DataMismatchError("reference signatures disagree on the layout");
    if (label != sig.label || label.size() != sig.victims.size())
      throw DataMismatchError("reference label does not match its signature");
  }
  const std::size_t k = first.victims.size();
  if (references.size() != (1u << k))
    throw DataMismatchError("reference set must cover every victim bitstring");
  return {first.victims, first.adversary};
}

}  // namespace

std::vector<uint64_t> plan_batches(uint64_t total_circuits,
                                   uint64_t max_per_batch) {
  if (total_circuits == 0) throw ConfigError("no circuits to batch");
  if (max_per_batch == 0) throw ConfigError("batch capacity must be >= 1");
  std::vector<uint64_t> batches(total_circuits / max_per_batch, max_per_batch);
  if (total_circuits % max_per_batch)
    batches.push_back(total_circuits % max_per_batch);
  return batches;
}

ReferenceSet collect_references(const DeviceModel& device,
                                const std::vector<int>& victims, int adversary,
                                uint64_t repetitions, uint64_t shots,
                                uint64_t seed, int threads) {
  if (victims.empty() || victims.size() > 8)
    throw ConfigError("victim count must be between 1 and 8");
  if (repetitions == 0) throw ConfigError("repetitions must be >= 1");
  const std::size_t k = victims.size();

  ReferenceSet references;
  for (uint32_t index = 0; index < (1u << k); ++index) {
    const std::string label = label_for(index, k);
    const Circuit circuit = build_multi_victim_reference(
        device, victims, adversary, states_for(label));
    uint64_t ones = 0;
    for (uint64_t rep = 0; rep < repetitions; ++rep) {
      const uint64_t run_seed = derive_seed(seed, index * repetitions + rep);
      ones += run(circuit, device, shots, run_seed, threads).ones(adversary);
    }
    const uint64_t pooled = repetitions * shots;
    Signature sig;
    sig.adversary = adversary;
    sig.victims = victims;
    sig.label = label;
    sig.zeros = pooled - ones;
    sig.ones = ones;
    sig.distribution = stats::BinaryDistribution::from_counts(sig.zeros, ones);
    sig.repetitions = repetitions;
    sig.shots_per_rep = shots;
    references.emplace(label, std::move(sig));
  }
  return references;
}

ClassificationResult classify(const ReferenceSet& references,
                              const stats::BinaryDistribution& observed) {
  if (references.size() < 2)
    throw ConfigError("need at least two reference labels");
  ClassificationResult result;
  bool first = true;
  double best = 0.0;
  // std::map iterates labels in ascending order, so keeping the strictly
  // smaller score implements the lexicographic tie-break.
  for (const auto& [label, sig] : references) {
    const double score = stats::jsd(sig.distribution, observed);
    result.scores[label] = score;
    if (first || score < best) {
      best = score;
      result.predicted = label;
      first = false;
    }
  }
  if (references.count("0") && references.count("1"))
    result.delta_jsd = result.scores.at("0") - result.scores.at("1");
  return result;
}

AttackReport run_attack_experiment(const DeviceModel& device,
                                   const ReferenceSet& references,
                                   uint64_t n_tests, DepthRange depth_range,
                                   uint64_t shots, uint64_t seed,
                                   int threads) {
  const Layout layout = layout_of(references);
  if (n_tests == 0) throw ConfigError("n_tests must be >= 1");
  if (depth_range.lo < 1 || depth_range.hi < depth_range.lo)
    throw ConfigError("invalid RB depth range");

  AttackReport report;
  report.n_tests = n_tests;
  report.shots = shots;
  report.trials.reserve(n_tests);
  for (uint64_t i = 0; i < n_tests; ++i) {
    // circuit_seed alone reconstructs the test circuit: depth and initial
    // states come from its substream 0, the gate choices from substream 1.
    const uint64_t circuit_seed = derive_seed(seed, 2 * i);
    const uint64_t run_seed = derive_seed(seed, 2 * i + 1);
    Rng meta(derive_seed(circuit_seed, 0));
    const int m = depth_range.lo + static_cast<int>(meta.next_below(
                                       depth_range.hi - depth_range.lo + 1));
    std::vector<int> states(layout.victims.size());
    for (int& s : states) s = meta.next_bool(0.5) ? 1 : 0;

    const Circuit circuit =
        build_multi_victim_rb(device, m, states, derive_seed(circuit_seed, 1),
                              layout.victims, layout.adversary);
    const ShotTable table = run(circuit, device, shots, run_seed, threads);
    ClassificationResult outcome =
        classify(references, marginal(table, layout.adversary));

    std::string truth(states.size(), '0');
    for (std::size_t j = 0; j < states.size(); ++j)
      if (states[j]) truth[j] = '1';

    AttackTrial trial;
    trial.circuit_seed = circuit_seed;
    trial.depth = m;
    trial.truth = std::move(truth);
    trial.predicted = outcome.predicted;
    trial.scores = std::move(outcome.scores);
    trial.delta_jsd = outcome.delta_jsd;
    report.trials.push_back(std::move(trial));
  }
  report.accuracy = stats::accuracy(report.trials);
  return report;
}

double jsd_noise_floor(const ReferenceSet& references, uint64_t pooled_shots,
                       uint64_t seed, int trials) {
  if (references.empty()) throw ConfigError("no reference labels");
  if (pooled_shots == 0) throw ConfigError("pooled shot count must be >= 1");
  if (trials < 100) throw ConfigError("floor calibration needs >= 100 trials");

  std::vector<double> label_p1;
  label_p1.reserve(references.size());
  for (const auto& [label, sig] : references)
    label_p1.push_back(sig.distribution.p1);

  // Same-label pairs: both sides are resamples of one true distribution, so
  // their JSD is pure sampling noise at this shot budget.
  std::vector<double> distances(trials);
  Rng rng(seed);
  for (int i = 0; i < trials; ++i) {
    const double p = label_p1[i % label_p1.size()];
    const uint64_t a = stats::sample_binomial(rng, pooled_shots, p);
    const uint64_t b = stats::sample_binomial(rng, pooled_shots, p);
    distances[i] = stats::jsd(
        stats::BinaryDistribution::from_counts(pooled_shots - a, a),
        stats::BinaryDistribution::from_counts(pooled_shots - b, b));
  }
  return stats::percentile(std::move(distances), 99.0);
}

SeparabilityReport separability(const ReferenceSet& references,
                                uint64_t pooled_shots, uint64_t seed,
                                int trials) {
  if (references.size() < 2)
    throw ConfigError("need at least two reference labels");

  SeparabilityReport report;
  for (const auto& [label, sig] : references) report.labels.push_back(label);
  const std::size_t n = report.labels.size();

  report.pairwise.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d =
          stats::jsd(references.at(report.labels[i]).distribution,
                     references.at(report.labels[j]).distribution);
      report.pairwise[i][j] = d;
      report.pairwise[j][i] = d;
    }

  report.floor = jsd_noise_floor(references, pooled_shots, seed, trials);
  report.floor_constant =
      report.floor * std::sqrt(static_cast<double>(pooled_shots));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (report.pairwise[i][j] < report.floor)
        report.overlapping.emplace_back(report.labels[i], report.labels[j]);
  report.feasible = report.overlapping.empty();
  return report;
}

}  // namespace qsense
