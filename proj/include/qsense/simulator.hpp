#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsense/circuit.hpp"
#include "qsense/device.hpp"
#include "qsense/stats.hpp"

namespace qsense {

// Raw measurement records: one bitmask per shot, bit j = outcome of
// measured_qubits[j] (ascending qubit id, matching Circuit::measured()).
struct ShotTable {
  std::string circuit_id;
  uint64_t seed = 0;
  std::vector<int> measured_qubits;
  std::vector<uint32_t> rows;

  uint64_t shots() const { return rows.size(); }
  int column(int qubit) const;          // index into the bitmask, or throws
  uint64_t ones(int qubit) const;       // count of shots reading 1
  std::string row_string(std::size_t row) const;  // e.g. "01", leftmost = lowest id

  void to_csv(std::ostream& out) const;
  nlohmann::json to_summary_json() const;  // bitstring -> count, plus provenance
};

// Exact joint readout distribution over measured-qubit bitstrings.
class OutcomeDistribution {
 public:
  // probabilities[mask]: bit j of mask = outcome of measured_qubits[j].
  // Entries must be non-negative and sum to 1 within 1e-12.
  OutcomeDistribution(std::vector<int> measured_qubits,
                      std::vector<double> probabilities);

  const std::vector<int>& measured_qubits() const { return measured_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  double probability(uint32_t mask) const;
  double probability(const std::string& bitstring) const;

 private:
  std::vector<int> measured_;
  std::vector<double> probabilities_;
};

// Samples `shots` executions of the circuit. Each qubit evolves
// independently through its gate column (unitary, then depolarizing with
// probability gate_error for X/Clifford gates, then amplitude damping every
// timestep — idling included); readout then flips each measured qubit with
// probabilities conditioned on the other measured qubits' pre-readout bits.
// Per-shot RNG streams are derived from (seed, shot index), so the result
// is bit-identical at any thread count.
ShotTable run(const Circuit& circuit, const DeviceModel& device,
              uint64_t shots, uint64_t seed, int threads = 1);

// Brute-force oracle: exact product of per-qubit pre-readout populations
// pushed through the context-conditioned readout flips. Guarded to at most
// 12 measured qubits.
OutcomeDistribution exact_distribution(const Circuit& circuit,
                                       const DeviceModel& device);

// Pooled single-qubit outcome frequencies.
stats::BinaryDistribution marginal(const ShotTable& table, int qubit);
stats::BinaryDistribution marginal(const OutcomeDistribution& dist, int qubit);

// Exact pre-readout P(state 1) for each measured qubit, in measured order.
std::vector<double> one_populations(const Circuit& circuit,
                                    const DeviceModel& device);

// Noise-free final basis state per measured qubit. Throws DataMismatchError
// if any measured qubit ideally ends in superposition.
std::vector<int> ideal_output(const Circuit& circuit);

// Total variation distance between empirical frequencies and the oracle.
double tvd(const ShotTable& table, const OutcomeDistribution& dist);

}  // namespace qsense
