#include "qsense/defense.hpp"

#include <algorithm>
#include <set>

#include "qsense/rng.hpp"

namespace qsense {

std::pair<Circuit, FlipMask> apply_countermeasure(
    const Circuit& circuit, const std::vector<int>& protected_qubits,
    uint64_t seed) {
  if (protected_qubits.empty()) throw ConfigError("no protected qubits given");
  FlipMask mask;
  mask.qubits = protected_qubits;
  mask.seed = seed;
  std::sort(mask.qubits.begin(), mask.qubits.end());
  for (std::size_t i = 0; i < mask.qubits.size(); ++i) {
    if (i > 0 && mask.qubits[i] == mask.qubits[i - 1])
      throw ConfigError("duplicate protected qubit " +
                        std::to_string(mask.qubits[i]));
    if (!circuit.has_qubit(mask.qubits[i]))
      throw ConfigError("unknown qubit " + std::to_string(mask.qubits[i]) +
                        " in protected set");
  }

  Rng rng(seed);
  mask.bits.resize(mask.qubits.size());
  for (int& bit : mask.bits) bit = rng.next_bool(0.5) ? 1 : 0;

  if (std::all_of(mask.bits.begin(), mask.bits.end(),
                  [](int b) { return b == 0; }))
    return {circuit, mask};

  // One new final timestep: X where masked, I where not, so every
  // protected track sees the same extra relaxation window.
  Circuit flipped = circuit;
  const int t = circuit.depth();
  for (std::size_t i = 0; i < mask.qubits.size(); ++i)
    flipped.add_gate(mask.bits[i] ? GateKind::kX : GateKind::kI,
                     mask.qubits[i], t);
  return {std::move(flipped), mask};
}

ShotTable unflip(const ShotTable& table, const FlipMask& mask) {
  if (mask.qubits.size() != mask.bits.size())
    throw DataMismatchError("mask bits do not match its qubits");
  uint32_t toggle = 0;
  for (std::size_t i = 0; i < mask.qubits.size(); ++i)
    if (mask.bits[i]) toggle |= 1u << table.column(mask.qubits[i]);

  ShotTable out = table;
  if (toggle)
    for (uint32_t& row : out.rows) row ^= toggle;
  return out;
}

std::vector<Circuit> make_fidelity_test_set(const DeviceModel& device,
                                            int victim, int n_circuits) {
  if (!device.has_qubit(victim))
    throw ConfigError("victim qubit " + std::to_string(victim) +
                      " not on device");
  if (n_circuits < 1) throw ConfigError("test set must have >= 1 circuit");

  std::vector<Circuit> circuits;
  circuits.reserve(n_circuits);
  for (int i = 0; i < n_circuits; ++i) {
    const int chain = 4 + i % 2;  // ideal output alternates 0, 1, 0, ...
    Circuit circuit({victim});
    for (int t = 0; t < chain; ++t) circuit.add_gate(GateKind::kX, victim, t);
    circuit.set_measured({victim});
    circuits.push_back(std::move(circuit));
  }
  return circuits;
}

FidelityReport fidelity_overhead(const DeviceModel& device,
                                 const std::vector<Circuit>& circuits,
                                 uint64_t shots, uint64_t seed, int threads) {
  if (circuits.empty()) throw ConfigError("empty fidelity test set");
  // Labels disjoint from the attack streams, so one top-level seed can
  // drive both experiments without sharing draws.
  const uint64_t mask_root = derive_seed(seed, stream_label("fidelity-mask"));
  const uint64_t run_root = derive_seed(seed, stream_label("fidelity-run"));

  auto fidelity_of = [](const ShotTable& table, const std::vector<int>& ideal) {
    uint32_t want = 0;
    for (std::size_t j = 0; j < ideal.size(); ++j)
      if (ideal[j]) want |= 1u << j;
    uint64_t correct = 0;
    for (uint32_t row : table.rows) correct += row == want ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(table.shots());
  };

  double with_sum = 0.0;
  double without_sum = 0.0;
  double protected_avg = 0.0;
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    const Circuit& circuit = circuits[i];
    const std::vector<int> ideal = ideal_output(circuit);
    // Common random numbers: both arms replay the same per-shot streams,
    // so the loss estimate is the direct effect of the extra gate.
    const uint64_t run_seed = derive_seed(run_root, i);
    without_sum +=
        fidelity_of(run(circuit, device, shots, run_seed, threads), ideal);

    // Masks are shared across consecutive test-set pairs. The set alternates
    // ideal outputs, so with asymmetric readout an uneven mask split between
    // the 0- and 1-groups would add noise far above the per-mille signal;
    // pairing cancels it while keeping each circuit masked half the time.
    auto [flipped, mask] = apply_countermeasure(circuit, circuit.measured(),
                                                derive_seed(mask_root, i / 2));
    const ShotTable masked = run(flipped, device, shots, run_seed, threads);
    with_sum += fidelity_of(unflip(masked, mask), ideal);
    protected_avg += static_cast<double>(circuit.measured().size());
  }

  FidelityReport report;
  report.fidelity_with_flip = with_sum / circuits.size();
  report.fidelity_without_flip = without_sum / circuits.size();
  report.loss = report.fidelity_without_flip - report.fidelity_with_flip;
  protected_avg /= circuits.size();
  // Each protected qubit is masked with probability 1/2; a masked X gate
  // depolarizes with probability eps (wrong half the time), and for
  // balanced ideal outputs half the masked tracks hold state 1 through the
  // extra timestep, exposed to one more relaxation window.
  report.loss_gate_error_est = protected_avg * 0.5 * device.gate_error() * 0.5;
  report.loss_relaxation_est =
      protected_avg * 0.5 * 0.5 * device.decay_per_step();
  return report;
}

AttackReport attack_under_defense(const DeviceModel& device,
                                  const ReferenceSet& references,
                                  uint64_t n_tests, DepthRange depth_range,
                                  uint64_t shots, uint64_t seed,
                                  bool masks_enabled, int threads) {
  const uint64_t test_root = derive_seed(seed, stream_label("test"));
  if (!masks_enabled)
    return run_attack_experiment(device, references, n_tests, depth_range,
                                 shots, test_root, threads);

  if (references.size() < 2)
    throw ConfigError("need at least two reference labels");
  if (n_tests == 0) throw ConfigError("n_tests must be >= 1");
  if (depth_range.lo < 1 || depth_range.hi < depth_range.lo)
    throw ConfigError("invalid RB depth range");
  const Signature& first = references.begin()->second;
  const std::vector<int>& victims = first.victims;
  const int adversary = first.adversary;

  const uint64_t mask_root = derive_seed(seed, stream_label("mask"));
  AttackReport report;
  report.n_tests = n_tests;
  report.shots = shots;
  report.trials.reserve(n_tests);
  for (uint64_t i = 0; i < n_tests; ++i) {
    // Trial generation mirrors run_attack_experiment exactly; only the
    // mask insertion below differs.
    const uint64_t circuit_seed = derive_seed(test_root, 2 * i);
    const uint64_t run_seed = derive_seed(test_root, 2 * i + 1);
    Rng meta(derive_seed(circuit_seed, 0));
    const int m = depth_range.lo + static_cast<int>(meta.next_below(
                                       depth_range.hi - depth_range.lo + 1));
    std::vector<int> states(victims.size());
    for (int& s : states) s = meta.next_bool(0.5) ? 1 : 0;

    Circuit circuit =
        build_multi_victim_rb(device, m, states, derive_seed(circuit_seed, 1),
                              victims, adversary);
    auto [flipped, mask] =
        apply_countermeasure(circuit, victims, derive_seed(mask_root, i));
    const ShotTable table = run(flipped, device, shots, run_seed, threads);
    ClassificationResult outcome =
        classify(references, marginal(table, adversary));

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

}  // namespace qsense
