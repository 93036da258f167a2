#include "qsense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <ostream>
#include <thread>

#include "qsense/clifford.hpp"
#include "qsense/rng.hpp"

namespace qsense {

namespace {

// 2x2 density matrix, row-major.
using Density = std::array<std::complex<double>, 4>;

Density apply_unitary(const Density& rho, const CliffordTable::Matrix& u) {
  // u * rho * u^dagger
  const Density ur = {u[0] * rho[0] + u[1] * rho[2], u[0] * rho[1] + u[1] * rho[3],
                      u[2] * rho[0] + u[3] * rho[2], u[2] * rho[1] + u[3] * rho[3]};
  return {ur[0] * std::conj(u[0]) + ur[1] * std::conj(u[1]),
          ur[0] * std::conj(u[2]) + ur[1] * std::conj(u[3]),
          ur[2] * std::conj(u[0]) + ur[3] * std::conj(u[1]),
          ur[2] * std::conj(u[2]) + ur[3] * std::conj(u[3])};
}

const CliffordTable::Matrix kPauliX = {0.0, 1.0, 1.0, 0.0};

// Exact channel composition for one qubit's track: the final diagonal is
// everything readout sampling needs. `noisy` switches the gate-error and
// relaxation channels on; readout noise is handled separately.
double final_one_population(const Circuit& circuit, int qubit,
                            const DeviceModel* device) {
  Density rho = {1.0, 0.0, 0.0, 0.0};
  const int depth = circuit.depth();
  const double eps = device ? device->gate_error() : 0.0;
  const double decay = device ? device->decay_per_step() : 0.0;
  for (int t = 0; t < depth; ++t) {
    const auto gate = circuit.gate_at(qubit, t);
    const bool real_gate =
        gate.has_value() && gate->kind != GateKind::kI;
    if (real_gate) {
      rho = apply_unitary(rho, gate->kind == GateKind::kX
                                   ? kPauliX
                                   : clifford_matrix(gate->clifford));
      if (eps > 0.0) {
        // Depolarizing: with probability eps the state becomes I/2.
        rho[0] = (1.0 - eps) * rho[0] + eps * 0.5;
        rho[1] *= (1.0 - eps);
        rho[2] *= (1.0 - eps);
        rho[3] = (1.0 - eps) * rho[3] + eps * 0.5;
      }
    }
    if (decay > 0.0) {
      // Amplitude damping acts every timestep, gate or idle.
      const double keep = std::sqrt(1.0 - decay);
      rho[0] += decay * rho[3];
      rho[1] *= keep;
      rho[2] *= keep;
      rho[3] *= (1.0 - decay);
    }
  }
  return std::clamp(rho[3].real(), 0.0, 1.0);
}

void check_circuit_on_device(const Circuit& circuit, const DeviceModel& device) {
  for (int q : circuit.qubits())
    if (!device.has_qubit(q))
      throw ConfigError("circuit references unknown qubit " + std::to_string(q));
}

// gamma[j][k]: crosstalk shift on measured qubit j from measured qubit k.
std::vector<std::vector<double>> gamma_table(const std::vector<int>& measured,
                                             const DeviceModel& device) {
  const std::size_t n = measured.size();
  std::vector<std::vector<double>> gamma(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (j != k) gamma[j][k] = device.crosstalk(measured[j], measured[k]);
  return gamma;
}

}  // namespace

int ShotTable::column(int qubit) const {
  auto it = std::find(measured_qubits.begin(), measured_qubits.end(), qubit);
  if (it == measured_qubits.end())
    throw DataMismatchError("qubit " + std::to_string(qubit) +
                            " is not in this shot table");
  return static_cast<int>(it - measured_qubits.begin());
}

uint64_t ShotTable::ones(int qubit) const {
  const uint32_t bit = 1u << column(qubit);
  uint64_t count = 0;
  for (uint32_t row : rows) count += (row & bit) ? 1 : 0;
  return count;
}

std::string ShotTable::row_string(std::size_t row) const {
  std::string s(measured_qubits.size(), '0');
  for (std::size_t j = 0; j < measured_qubits.size(); ++j)
    if (rows[row] & (1u << j)) s[j] = '1';
  return s;
}

void ShotTable::to_csv(std::ostream& out) const {
  out << "# circuit " << circuit_id << " seed " << seed << "\n";
  out << "shot,outcome\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << i << "," << row_string(i) << "\n";
}

nlohmann::json ShotTable::to_summary_json() const {
  nlohmann::json counts = nlohmann::json::object();
  std::map<std::string, uint64_t> tally;
  for (std::size_t i = 0; i < rows.size(); ++i) ++tally[row_string(i)];
  for (const auto& [bits, n] : tally) counts[bits] = n;
  return {{"circuit", circuit_id},
          {"seed", seed},
          {"measured", measured_qubits},
          {"shots", shots()},
          {"counts", std::move(counts)}};
}

OutcomeDistribution::OutcomeDistribution(std::vector<int> measured_qubits,
                                         std::vector<double> probabilities)
    : measured_(std::move(measured_qubits)),
      probabilities_(std::move(probabilities)) {
  if (measured_.empty() || measured_.size() > 20 ||
      probabilities_.size() != (1u << measured_.size()))
    throw DataMismatchError("outcome table size does not match qubit count");
  double sum = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0))
      throw DataMismatchError("outcome probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw DataMismatchError("outcome probabilities do not sum to 1");
}

double OutcomeDistribution::probability(uint32_t mask) const {
  if (mask >= probabilities_.size())
    throw DataMismatchError("outcome mask out of range");
  return probabilities_[mask];
}

double OutcomeDistribution::probability(const std::string& bitstring) const {
  if (bitstring.size() != measured_.size())
    throw DataMismatchError("bitstring length does not match qubit count");
  uint32_t mask = 0;
  for (std::size_t j = 0; j < bitstring.size(); ++j) {
    if (bitstring[j] == '1')
      mask |= 1u << j;
    else if (bitstring[j] != '0')
      throw DataMismatchError("bitstring must contain only 0 and 1");
  }
  return probabilities_[mask];
}

ShotTable run(const Circuit& circuit, const DeviceModel& device,
              uint64_t shots, uint64_t seed, int threads) {
  check_circuit_on_device(circuit, device);
  if (shots == 0) throw ConfigError("shots must be at least 1");
  if (circuit.measured().empty())
    throw ConfigError("circuit measures no qubits");

  const std::vector<int>& measured = circuit.measured();
  const std::size_t n = measured.size();
  std::vector<double> p1(n);
  for (std::size_t j = 0; j < n; ++j)
    p1[j] = final_one_population(circuit, measured[j], &device);
  const auto gamma = gamma_table(measured, device);
  std::vector<ConfusionPair> base(n);
  for (std::size_t j = 0; j < n; ++j) base[j] = device.readout(measured[j]);

  ShotTable table;
  table.circuit_id = circuit.id();
  table.seed = seed;
  table.measured_qubits = measured;
  table.rows.resize(shots);

  auto sample_range = [&](uint64_t begin, uint64_t end) {
    std::vector<int> pre(n);
    for (uint64_t s = begin; s < end; ++s) {
      Rng rng(derive_seed(seed, s));
      for (std::size_t j = 0; j < n; ++j) pre[j] = rng.next_bool(p1[j]) ? 1 : 0;
      uint32_t row = 0;
      for (std::size_t j = 0; j < n; ++j) {
        double shift = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          if (k != j && pre[k] == 1) shift += gamma[j][k];
        const double flip =
            std::clamp((pre[j] ? base[j].p10 : base[j].p01) + shift, 0.0, 1.0);
        const int bit = pre[j] ^ (rng.next_bool(flip) ? 1 : 0);
        row |= static_cast<uint32_t>(bit) << j;
      }
      table.rows[s] = row;
    }
  };

  const int workers = std::clamp(threads, 1, 64);
  if (workers == 1 || shots < 2048) {
    sample_range(0, shots);
  } else {
    std::vector<std::thread> pool;
    const uint64_t chunk = (shots + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const uint64_t begin = chunk * w;
      const uint64_t end = std::min(shots, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(sample_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return table;
}

OutcomeDistribution exact_distribution(const Circuit& circuit,
                                       const DeviceModel& device) {
  check_circuit_on_device(circuit, device);
  const std::vector<int>& measured = circuit.measured();
  const std::size_t n = measured.size();
  if (n == 0) throw ConfigError("circuit measures no qubits");
  if (n > 12)
    throw ConfigError("too many measured qubits for the exact oracle: " +
                      std::to_string(n));

  std::vector<double> p1(n);
  for (std::size_t j = 0; j < n; ++j)
    p1[j] = final_one_population(circuit, measured[j], &device);
  const auto gamma = gamma_table(measured, device);
  std::vector<ConfusionPair> base(n);
  for (std::size_t j = 0; j < n; ++j) base[j] = device.readout(measured[j]);

  const uint32_t size = 1u << n;
  std::vector<double> out(size, 0.0);
  for (uint32_t pre = 0; pre < size; ++pre) {
    double p_pre = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      p_pre *= (pre & (1u << j)) ? p1[j] : 1.0 - p1[j];
    if (p_pre == 0.0) continue;

    std::vector<double> flip(n);
    for (std::size_t j = 0; j < n; ++j) {
      double shift = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        if (k != j && (pre & (1u << k))) shift += gamma[j][k];
      flip[j] = std::clamp(
          ((pre & (1u << j)) ? base[j].p10 : base[j].p01) + shift, 0.0, 1.0);
    }
    for (uint32_t obs = 0; obs < size; ++obs) {
      double p = p_pre;
      for (std::size_t j = 0; j < n; ++j) {
        const bool flipped = ((pre ^ obs) >> j) & 1u;
        p *= flipped ? flip[j] : 1.0 - flip[j];
        if (p == 0.0) break;
      }
      out[obs] += p;
    }
  }

  // The true total is exactly 1; normalize away accumulated rounding.
  double sum = 0.0;
  for (double p : out) sum += p;
  for (double& p : out) p /= sum;
  return OutcomeDistribution(measured, std::move(out));
}

stats::BinaryDistribution marginal(const ShotTable& table, int qubit) {
  if (table.rows.empty()) throw DataMismatchError("shot table is empty");
  const uint64_t one = table.ones(qubit);
  return stats::BinaryDistribution::from_counts(table.shots() - one, one);
}

stats::BinaryDistribution marginal(const OutcomeDistribution& dist, int qubit) {
  const std::vector<int>& measured = dist.measured_qubits();
  auto it = std::find(measured.begin(), measured.end(), qubit);
  if (it == measured.end())
    throw DataMismatchError("qubit " + std::to_string(qubit) +
                            " is not in this distribution");
  const uint32_t bit = 1u << (it - measured.begin());
  double p1 = 0.0;
  for (uint32_t mask = 0; mask < dist.probabilities().size(); ++mask)
    if (mask & bit) p1 += dist.probabilities()[mask];
  p1 = std::clamp(p1, 0.0, 1.0);
  return {1.0 - p1, p1};
}

std::vector<double> one_populations(const Circuit& circuit,
                                    const DeviceModel& device) {
  check_circuit_on_device(circuit, device);
  std::vector<double> p1;
  p1.reserve(circuit.measured().size());
  for (int q : circuit.measured())
    p1.push_back(final_one_population(circuit, q, &device));
  return p1;
}

std::vector<int> ideal_output(const Circuit& circuit) {
  std::vector<int> bits;
  bits.reserve(circuit.measured().size());
  for (int q : circuit.measured()) {
    const double p1 = final_one_population(circuit, q, nullptr);
    if (p1 > 1.0 - 1e-9)
      bits.push_back(1);
    else if (p1 < 1e-9)
      bits.push_back(0);
    else
      throw DataMismatchError("qubit " + std::to_string(q) +
                              " has no definite noiseless output");
  }
  return bits;
}

double tvd(const ShotTable& table, const OutcomeDistribution& dist) {
  if (table.measured_qubits != dist.measured_qubits())
    throw DataMismatchError("shot table and distribution measure different qubits");
  if (table.rows.empty()) throw DataMismatchError("shot table is empty");
  std::vector<uint64_t> counts(dist.probabilities().size(), 0);
  for (uint32_t row : table.rows) {
    if (row >= counts.size())
      throw DataMismatchError("shot row outside the distribution's support");
    ++counts[row];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    total += std::abs(static_cast<double>(counts[i]) / table.shots() -
                      dist.probabilities()[i]);
  return 0.5 * total;
}

}  // namespace qsense
