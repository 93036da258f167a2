#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsense/device.hpp"
#include "qsense/simulator.hpp"
#include "qsense/stats.hpp"

namespace qsense {

// Pooled adversary-qubit outcome distribution conditioned on one victim
// output label. Counts are kept alongside the distribution so signatures
// can be persisted and reloaded exactly.
struct Signature {
  int adversary = -1;
  std::vector<int> victims;
  std::string label;  // victim bitstring; char i belongs to victims[i]
  stats::BinaryDistribution distribution;
  uint64_t zeros = 0;
  uint64_t ones = 0;
  uint64_t repetitions = 0;
  uint64_t shots_per_rep = 0;
};

using ReferenceSet = std::map<std::string, Signature>;  // label -> signature

struct ClassificationResult {
  std::map<std::string, double> scores;  // label -> distance to observed
  std::string predicted;                 // argmin; ties -> smallest label
  double delta_jsd = 0.0;                // scores["0"] - scores["1"] (binary)
  std::optional<std::string> truth;
};

// One attack trial: the classification plus the circuit it was run on.
struct AttackTrial {
  uint64_t circuit_seed = 0;
  int depth = 0;
  std::optional<std::string> truth;
  std::string predicted;
  std::map<std::string, double> scores;
  double delta_jsd = 0.0;
};

struct AttackReport {
  std::vector<AttackTrial> trials;
  double accuracy = 0.0;
  uint64_t n_tests = 0;
  uint64_t shots = 0;
};

struct DepthRange {
  int lo = 1;
  int hi = 10;
};

// Submission batching: hardware queues cap the number of circuits accepted
// at once, so reference collection is planned as full batches of
// max_per_batch plus a remainder.
std::vector<uint64_t> plan_batches(uint64_t total_circuits,
                                   uint64_t max_per_batch = 75);

// Runs the reference circuit for every victim bitstring label,
// `repetitions` times x `shots` each, pooling the adversary marginal into
// one Signature per label. Labels enumerate all 2^k bitstrings of the k
// victims, in lexicographic order.
ReferenceSet collect_references(const DeviceModel& device,
                                const std::vector<int>& victims, int adversary,
                                uint64_t repetitions, uint64_t shots,
                                uint64_t seed, int threads = 1);

// Scores the observed adversary distribution against every reference and
// predicts the closest label (Jensen-Shannon distance, deterministic
// tie-break to the lexicographically smallest label).
ClassificationResult classify(const ReferenceSet& references,
                              const stats::BinaryDistribution& observed);

// Full attack experiment: n_tests randomized-benchmarking circuits with
// uniformly random depth and initial states, each simulated and classified;
// ground truth is the prepared state (the victim's ideal output).
AttackReport run_attack_experiment(const DeviceModel& device,
                                   const ReferenceSet& references,
                                   uint64_t n_tests, DepthRange depth_range,
                                   uint64_t shots, uint64_t seed,
                                   int threads = 1);

// Sampling-noise floor for signature JSD at a pooled shot count: simulates
// `trials` pairs of same-distribution resamples (one per reference label,
// round-robin) and takes the 99th percentile of their JSD.
double jsd_noise_floor(const ReferenceSet& references, uint64_t pooled_shots,
                       uint64_t seed, int trials = 4096);

struct SeparabilityReport {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> pairwise;  // symmetric JSD matrix
  double floor = 0.0;                         // calibrated noise floor
  double floor_constant = 0.0;                // floor * sqrt(pooled shots)
  bool feasible = false;                      // all pairs above the floor
  std::vector<std::pair<std::string, std::string>> overlapping;
};

// Pairwise JSD between all reference labels with an infeasibility verdict:
// any pair whose distance falls below the calibrated floor cannot be told
// apart at this shot budget.
SeparabilityReport separability(const ReferenceSet& references,
                                uint64_t pooled_shots, uint64_t seed,
                                int trials = 4096);

}  // namespace qsense
