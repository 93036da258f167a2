#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qsense/errors.hpp"

namespace qsense {

// State-dependent readout flip probabilities for one qubit:
// p01 = P(read 1 | true 0), p10 = P(read 0 | true 1).
struct ConfusionPair {
  double p01 = 0.0;
  double p10 = 0.0;
};

// Immutable description of a simulated device: qubit ids, coupling graph,
// and every noise parameter. Readout crosstalk is a pairwise additive model:
// each source qubit in pre-readout state 1 shifts both flip probabilities of
// an observer qubit by gamma(observer, source).
class DeviceModel {
 public:
  // crosstalk is keyed (observer, source). Throws ConfigError when any
  // invariant fails: probabilities outside [0,1], non-positive times,
  // unknown qubits in edges/readout/crosstalk, or a disconnected graph.
  DeviceModel(std::string name, std::vector<int> qubits,
              std::vector<std::pair<int, int>> edges,
              std::map<int, ConfusionPair> readout,
              std::map<std::pair<int, int>, double> crosstalk,
              double gate_error, double gate_time_ns, double t1_us);

  const std::string& name() const { return name_; }
  const std::vector<int>& qubits() const { return qubits_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const ConfusionPair& readout(int qubit) const;
  // gamma(observer, source); 0 when the pair is absent.
  double crosstalk(int observer, int source) const;
  const std::map<std::pair<int, int>, double>& crosstalk_map() const {
    return crosstalk_;
  }
  double gate_error() const { return gate_error_; }
  double gate_time_ns() const { return gate_time_ns_; }
  double t1_us() const { return t1_us_; }

  bool has_qubit(int qubit) const;
  bool adjacent(int a, int b) const;
  // Coupling-graph hop count (graph is connected by invariant).
  int distance(int a, int b) const;

  // Probability a qubit relaxes 1 -> 0 during one timestep.
  double decay_per_step() const;

  // Readout confusion of `observer` given the pre-readout basis states of
  // other qubits: both flip probabilities shifted by the summed gamma of
  // sources in state 1, clamped to [0,1].
  ConfusionPair effective_confusion(int observer,
                                    const std::map<int, int>& source_states) const;

  // Derived variants for experiments: crosstalk scaled by `factor`
  // (clamped to [0,1]), and a fully noise-free copy.
  DeviceModel scaled_crosstalk(double factor) const;
  DeviceModel noiseless() const;

  nlohmann::json to_json() const;
  static DeviceModel from_json(const nlohmann::json& j);

  // FNV-1a of the canonical JSON dump; ties result files to the exact model.
  uint64_t hash() const;
  std::string hash_hex() const;

 private:
  std::string name_;
  std::vector<int> qubits_;
  std::vector<std::pair<int, int>> edges_;
  std::map<int, ConfusionPair> readout_;
  std::map<std::pair<int, int>, double> crosstalk_;
  double gate_error_;
  double gate_time_ns_;
  double t1_us_;
};

// Built-in 5-qubit devices: "linear5" is the path Q0-Q1-Q2-Q3-Q4, "tee5"
// the star-with-tail {Q0-Q1, Q1-Q2, Q1-Q3, Q3-Q4}. Both use the default
// noise set (p01 0.015, p10 0.04, adjacent gamma 0.010 halving per extra
// hop, gate error 5e-4, 50 ns timesteps, T1 100 us).
DeviceModel preset(const std::string& name);

// Loads and validates a calibration JSON file. Unknown fields are rejected.
DeviceModel load_device(const std::string& path);

}  // namespace qsense
