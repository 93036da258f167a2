#include "qsense/circuit.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include "qsense/clifford.hpp"
#include "qsense/rng.hpp"

namespace qsense {

namespace {

std::string kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::kI: return "I";
    case GateKind::kX: return "X";
    case GateKind::kClifford: return "CLIFFORD";
  }
  throw std::logic_error("unreachable gate kind");
}

GateKind kind_from_name(const std::string& name) {
  if (name == "I") return GateKind::kI;
  if (name == "X") return GateKind::kX;
  if (name == "CLIFFORD") return GateKind::kClifford;
  throw ConfigError("unknown gate kind \"" + name + "\"");
}

void check_victim_layout(const DeviceModel& device,
                         const std::vector<int>& victims, int adversary) {
  if (victims.empty()) throw ConfigError("no victim qubits given");
  std::set<int> seen;
  for (int v : victims) {
    if (!device.has_qubit(v))
      throw ConfigError("victim qubit " + std::to_string(v) + " not on device");
    if (!seen.insert(v).second)
      throw ConfigError("duplicate victim qubit " + std::to_string(v));
    if (v == adversary)
      throw ConfigError("victim and adversary share qubit " + std::to_string(v));
  }
  if (!device.has_qubit(adversary))
    throw ConfigError("adversary qubit " + std::to_string(adversary) +
                      " not on device");
}

}  // namespace

Circuit::Circuit(std::vector<int> qubits) : qubits_(std::move(qubits)) {
  if (qubits_.empty()) throw ConfigError("circuit has no qubits");
  std::sort(qubits_.begin(), qubits_.end());
  for (std::size_t i = 1; i < qubits_.size(); ++i)
    if (qubits_[i] == qubits_[i - 1])
      throw ConfigError("duplicate circuit qubit " + std::to_string(qubits_[i]));
}

void Circuit::add_gate(GateKind kind, int qubit, int t, int clifford) {
  if (!has_qubit(qubit))
    throw ConfigError("gate references undeclared qubit " + std::to_string(qubit));
  if (t < 0) throw ConfigError("gate timestep must be non-negative");
  if (kind == GateKind::kClifford &&
      (clifford < 0 || clifford >= CliffordTable::kSize))
    throw ConfigError("Clifford index out of range: " + std::to_string(clifford));
  if (gate_at(qubit, t).has_value())
    throw ConfigError("qubit " + std::to_string(qubit) +
                      " already has a gate at timestep " + std::to_string(t));
  Gate gate{kind, qubit, t, kind == GateKind::kClifford ? clifford : 0};
  // Keep gates sorted by (t, qubit) so serialization is canonical.
  auto pos = std::upper_bound(gates_.begin(), gates_.end(), gate,
                              [](const Gate& a, const Gate& b) {
                                return std::tie(a.t, a.qubit) < std::tie(b.t, b.qubit);
                              });
  gates_.insert(pos, gate);
}

void Circuit::set_measured(std::vector<int> qubits) {
  if (qubits.empty()) throw ConfigError("measured qubit set is empty");
  std::sort(qubits.begin(), qubits.end());
  for (std::size_t i = 1; i < qubits.size(); ++i)
    if (qubits[i] == qubits[i - 1])
      throw ConfigError("duplicate measured qubit " + std::to_string(qubits[i]));
  for (int q : qubits)
    if (!has_qubit(q))
      throw ConfigError("measured qubit " + std::to_string(q) +
                        " is not declared by the circuit");
  measured_ = std::move(qubits);
}

int Circuit::depth() const {
  int max_t = 0;
  for (const Gate& g : gates_) max_t = std::max(max_t, g.t);
  return max_t + 1;
}

std::optional<Gate> Circuit::gate_at(int qubit, int t) const {
  for (const Gate& g : gates_)
    if (g.qubit == qubit && g.t == t) return g;
  return std::nullopt;
}

bool Circuit::has_qubit(int qubit) const {
  return std::binary_search(qubits_.begin(), qubits_.end(), qubit);
}

bool Circuit::is_measured(int qubit) const {
  return std::binary_search(measured_.begin(), measured_.end(), qubit);
}

nlohmann::json Circuit::to_json() const {
  nlohmann::json j;
  j["qubits"] = qubits_;
  j["gates"] = nlohmann::json::array();
  for (const Gate& g : gates_) {
    nlohmann::json gate{{"kind", kind_name(g.kind)}, {"qubit", g.qubit}, {"t", g.t}};
    if (g.kind == GateKind::kClifford) gate["index"] = g.clifford;
    j["gates"].push_back(std::move(gate));
  }
  j["measured"] = measured_;
  return j;
}

Circuit Circuit::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("circuit must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "qubits" && key != "gates" && key != "measured")
      throw ConfigError("unknown field \"" + key + "\" in circuit");
  }
  try {
    Circuit circuit(j.at("qubits").get<std::vector<int>>());
    for (const auto& g : j.at("gates")) {
      for (const auto& [key, value] : g.items()) {
        (void)value;
        if (key != "kind" && key != "qubit" && key != "t" && key != "index")
          throw ConfigError("unknown field \"" + key + "\" in gate");
      }
      const GateKind kind = kind_from_name(g.at("kind").get<std::string>());
      if (kind == GateKind::kClifford && !g.contains("index"))
        throw ConfigError("CLIFFORD gate is missing its index");
      if (kind != GateKind::kClifford && g.contains("index"))
        throw ConfigError("only CLIFFORD gates carry an index");
      circuit.add_gate(kind, g.at("qubit").get<int>(), g.at("t").get<int>(),
                       kind == GateKind::kClifford ? g.at("index").get<int>() : 0);
    }
    circuit.set_measured(j.at("measured").get<std::vector<int>>());
    return circuit;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("circuit format error: ") + e.what());
  }
}

std::string Circuit::id() const {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(to_json().dump());
  return out.str();
}

Circuit build_reference_circuit(const DeviceModel& device, int victim,
                                int adversary, int victim_state) {
  return build_multi_victim_reference(device, {victim}, adversary, {victim_state});
}

Circuit build_multi_victim_reference(const DeviceModel& device,
                                     const std::vector<int>& victims,
                                     int adversary,
                                     const std::vector<int>& victim_states) {
  check_victim_layout(device, victims, adversary);
  if (victims.size() != victim_states.size())
    throw ConfigError("need one target state per victim");
  for (int s : victim_states)
    if (s != 0 && s != 1) throw ConfigError("victim state must be 0 or 1");

  // Odd chain (5) flips the qubit to 1, even chain (4) returns it to 0; the
  // overall depth is the longest chain and short tracks idle via I padding.
  int depth = 0;
  for (int s : victim_states) depth = std::max(depth, s == 1 ? 5 : 4);

  std::vector<int> qubits = victims;
  qubits.push_back(adversary);
  Circuit circuit(std::move(qubits));
  for (std::size_t i = 0; i < victims.size(); ++i) {
    const int chain = victim_states[i] == 1 ? 5 : 4;
    for (int t = 0; t < chain; ++t) circuit.add_gate(GateKind::kX, victims[i], t);
    for (int t = chain; t < depth; ++t) circuit.add_gate(GateKind::kI, victims[i], t);
  }
  circuit.add_gate(GateKind::kX, adversary, depth - 1);

  std::vector<int> measured = victims;
  measured.push_back(adversary);
  circuit.set_measured(std::move(measured));
  return circuit;
}

Circuit build_rb_circuit(const DeviceModel& device, const RBSpec& spec,
                         int victim, int adversary) {
  return build_multi_victim_rb(device, spec.m, {spec.initial_state}, spec.seed,
                               {victim}, adversary);
}

Circuit build_multi_victim_rb(const DeviceModel& device, int m,
                              const std::vector<int>& initial_states,
                              uint64_t seed, const std::vector<int>& victims,
                              int adversary) {
  check_victim_layout(device, victims, adversary);
  if (m < 1) throw ConfigError("RB sequence length must be >= 1");
  if (victims.size() != initial_states.size())
    throw ConfigError("need one initial state per victim");
  for (int s : initial_states)
    if (s != 0 && s != 1) throw ConfigError("initial state must be 0 or 1");

  std::vector<int> qubits = victims;
  qubits.push_back(adversary);
  Circuit circuit(std::move(qubits));

  for (std::size_t i = 0; i < victims.size(); ++i) {
    circuit.add_gate(initial_states[i] == 1 ? GateKind::kX : GateKind::kI,
                     victims[i], 0);
    // m-1 uniform random Cliffords, then the inverse of their composition;
    // the noiseless track therefore ends back in the prepared state.
    Rng rng(derive_seed(seed, i));
    int acc = CliffordTable::kIdentity;
    for (int t = 1; t < m; ++t) {
      const int g = static_cast<int>(rng.next_below(CliffordTable::kSize));
      circuit.add_gate(GateKind::kClifford, victims[i], t, g);
      acc = clifford_compose(g, acc);  // later gates multiply on the left
    }
    circuit.add_gate(GateKind::kClifford, victims[i], m, clifford_inverse(acc));
  }
  circuit.add_gate(GateKind::kX, adversary, m);

  std::vector<int> measured = victims;
  measured.push_back(adversary);
  circuit.set_measured(std::move(measured));
  return circuit;
}

}  // namespace qsense
