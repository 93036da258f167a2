#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsense/device.hpp"

namespace qsense {

enum class GateKind { kI, kX, kClifford };

struct Gate {
  GateKind kind = GateKind::kI;
  int qubit = 0;
  int t = 0;
  int clifford = 0;  // table index; meaningful only when kind == kClifford
};

// Timestep-gridded single-qubit gate sequences over declared qubit ids,
// with a terminal measurement. At most one gate per (qubit, timestep);
// an I gate occupies its slot, modeling idling (and thus relaxation).
class Circuit {
 public:
  explicit Circuit(std::vector<int> qubits);

  void add_gate(GateKind kind, int qubit, int t, int clifford = 0);
  void set_measured(std::vector<int> qubits);

  const std::vector<int>& qubits() const { return qubits_; }
  // Gates sorted by (timestep, qubit).
  const std::vector<Gate>& gates() const { return gates_; }
  // Measured qubit ids, ascending. Bit/bitstring positions follow this order.
  const std::vector<int>& measured() const { return measured_; }
  int depth() const;  // max timestep + 1, at least 1
  std::optional<Gate> gate_at(int qubit, int t) const;
  bool has_qubit(int qubit) const;
  bool is_measured(int qubit) const;

  nlohmann::json to_json() const;
  static Circuit from_json(const nlohmann::json& j);
  // Content hash of the canonical JSON form; result-file provenance.
  std::string id() const;

 private:
  std::vector<int> qubits_;
  std::vector<Gate> gates_;
  std::vector<int> measured_;
};

// Reference circuit for signature collection: the victim runs an X chain of
// length 5 (target bit 1) or 4 (target bit 0); the adversary places a single
// X at the final timestep so its qubit relaxes as little as possible before
// readout. Both qubits are measured.
Circuit build_reference_circuit(const DeviceModel& device, int victim,
                                int adversary, int victim_state);

// Same per-victim X-chain rule for several victims at once; shorter chains
// are padded with I so every victim idles for the same depth.
Circuit build_multi_victim_reference(const DeviceModel& device,
                                     const std::vector<int>& victims,
                                     int adversary,
                                     const std::vector<int>& victim_states);

struct RBSpec {
  int m = 1;              // sequence length; circuit depth is m + 1
  int initial_state = 0;  // prep X when 1, I when 0
  uint64_t seed = 0;      // drives the random gate choices only
};

// Victim track: prep gate, m-1 uniformly random Cliffords, then the group
// inverse of their composition, so the noiseless output equals
// initial_state. Adversary track: single X at the final timestep.
Circuit build_rb_circuit(const DeviceModel& device, const RBSpec& spec,
                         int victim, int adversary);

// Independent random sequences per victim, sharing one depth m.
Circuit build_multi_victim_rb(const DeviceModel& device, int m,
                              const std::vector<int>& initial_states,
                              uint64_t seed, const std::vector<int>& victims,
                              int adversary);

}  // namespace qsense
