#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qsense/attack.hpp"
#include "qsense/circuit.hpp"
#include "qsense/device.hpp"
#include "qsense/simulator.hpp"

namespace qsense {

// Which protected qubits had an X appended before measurement. The mask is
// sampled once per job and shared by all of that job's shots, because the
// gates are part of the submitted circuit.
struct FlipMask {
  std::vector<int> qubits;  // protected qubit ids, ascending
  std::vector<int> bits;    // 1 = output inverted
  uint64_t seed = 0;
};

// Samples a uniform mask over the protected qubits and appends an X at a
// new final timestep for each masked qubit (I for the unmasked ones, so
// every protected track idles equally). An all-zeros mask leaves the
// circuit untouched.
std::pair<Circuit, FlipMask> apply_countermeasure(
    const Circuit& circuit, const std::vector<int>& protected_qubits,
    uint64_t seed);

// Post-processing inverse: XORs masked columns back. Exactly undoes the
// mask on noiseless data.
ShotTable unflip(const ShotTable& table, const FlipMask& mask);

struct FidelityReport {
  double fidelity_with_flip = 0.0;
  double fidelity_without_flip = 0.0;
  double loss = 0.0;  // without - with
  // Analytic expectations of where the loss comes from (per protected
  // qubit, balanced ideal outputs): the appended gate's depolarizing error
  // and the one extra timestep of relaxation. Reported for context; the
  // measured loss is authoritative.
  double loss_gate_error_est = 0.0;
  double loss_relaxation_est = 0.0;
};

// Victim-only circuits with deterministically alternating ideal outputs
// (X chains of length 4 then 5). Balancing matters: readout error is
// state-asymmetric, so an unbalanced set would bias the measured loss.
std::vector<Circuit> make_fidelity_test_set(const DeviceModel& device,
                                            int victim, int n_circuits);

// Runs every circuit with and without the countermeasure under common
// random numbers and compares fidelity (correct-output shots / shots,
// scored against the ideal output after unflip).
FidelityReport fidelity_overhead(const DeviceModel& device,
                                 const std::vector<Circuit>& circuits,
                                 uint64_t shots, uint64_t seed,
                                 int threads = 1);

// The attack pipeline against protected victims: same trial generation as
// run_attack_experiment, but each test circuit gets a fresh random mask
// before simulation (unless masks_enabled is false, which reproduces the
// undefended experiment exactly). The adversary is still scored against
// the victim's ideal output, which it can no longer infer.
AttackReport attack_under_defense(const DeviceModel& device,
                                  const ReferenceSet& references,
                                  uint64_t n_tests, DepthRange depth_range,
                                  uint64_t shots, uint64_t seed,
                                  bool masks_enabled = true, int threads = 1);

}  // namespace qsense
