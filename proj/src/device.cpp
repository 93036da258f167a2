#include "qsense/device.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "qsense/rng.hpp"

namespace qsense {

namespace {

bool valid_probability(double v) { return v >= 0.0 && v <= 1.0; }

std::string edge_str(int a, int b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

std::string pair_key(int source, int observer) {
  return std::to_string(source) + "->" + std::to_string(observer);
}

// Strict integer parse: the whole token must be a decimal int.
int parse_qubit_id(const std::string& token, const std::string& where) {
  int value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(where + " key \"" + token + "\" is not a qubit id");
  return value;
}

}  // namespace

DeviceModel::DeviceModel(std::string name, std::vector<int> qubits,
                         std::vector<std::pair<int, int>> edges,
                         std::map<int, ConfusionPair> readout,
                         std::map<std::pair<int, int>, double> crosstalk,
                         double gate_error, double gate_time_ns, double t1_us)
    : name_(std::move(name)),
      qubits_(std::move(qubits)),
      edges_(std::move(edges)),
      readout_(std::move(readout)),
      crosstalk_(std::move(crosstalk)),
      gate_error_(gate_error),
      gate_time_ns_(gate_time_ns),
      t1_us_(t1_us) {
  if (qubits_.empty()) throw ConfigError("device has no qubits");
  std::sort(qubits_.begin(), qubits_.end());
  for (std::size_t i = 1; i < qubits_.size(); ++i)
    if (qubits_[i] == qubits_[i - 1])
      throw ConfigError("duplicate qubit id " + std::to_string(qubits_[i]));

  for (int q : qubits_) {
    auto it = readout_.find(q);
    if (it == readout_.end())
      throw ConfigError("missing readout entry for qubit " + std::to_string(q));
    if (!valid_probability(it->second.p01))
      throw ConfigError("readout.p01 probability out of range for qubit " +
                        std::to_string(q) + ": " + std::to_string(it->second.p01));
    if (!valid_probability(it->second.p10))
      throw ConfigError("readout.p10 probability out of range for qubit " +
                        std::to_string(q) + ": " + std::to_string(it->second.p10));
  }
  for (const auto& [q, pair] : readout_)
    if (!has_qubit(q))
      throw ConfigError("readout entry references unknown qubit " +
                        std::to_string(q));

  // Canonicalize edges to (low, high), sorted, no duplicates or self-loops.
  for (auto& [a, b] : edges_) {
    if (!has_qubit(a) || !has_qubit(b))
      throw ConfigError("edge " + edge_str(a, b) + " references unknown qubit " +
                        std::to_string(has_qubit(a) ? b : a));
    if (a == b) throw ConfigError("edge " + edge_str(a, b) + " is a self-loop");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (edges_[i] == edges_[i - 1])
      throw ConfigError("duplicate edge " +
                        edge_str(edges_[i].first, edges_[i].second));

  if (qubits_.size() > 1) {
    std::set<int> seen{qubits_.front()};
    std::deque<int> frontier{qubits_.front()};
    while (!frontier.empty()) {
      const int q = frontier.front();
      frontier.pop_front();
      for (const auto& [a, b] : edges_) {
        if (a != q && b != q) continue;
        const int other = (a == q) ? b : a;
        if (seen.insert(other).second) frontier.push_back(other);
      }
    }
    if (seen.size() != qubits_.size())
      throw ConfigError("coupling graph not connected");
  }

  for (const auto& [pair, gamma] : crosstalk_) {
    const auto& [observer, source] = pair;
    if (!has_qubit(observer) || !has_qubit(source))
      throw ConfigError("crosstalk entry " + pair_key(source, observer) +
                        " references unknown qubit " +
                        std::to_string(has_qubit(observer) ? source : observer));
    if (observer == source)
      throw ConfigError("crosstalk entry " + pair_key(source, observer) +
                        " pairs a qubit with itself");
    if (!valid_probability(gamma))
      throw ConfigError("crosstalk probability out of range for " +
                        pair_key(source, observer) + ": " +
                        std::to_string(gamma));
  }

  if (!valid_probability(gate_error_))
    throw ConfigError("gate_error probability out of range: " +
                      std::to_string(gate_error_));
  if (!(gate_time_ns_ > 0.0)) throw ConfigError("gate_time_ns must be positive");
  if (!(t1_us_ > 0.0)) throw ConfigError("t1_us must be positive");
}

const ConfusionPair& DeviceModel::readout(int qubit) const {
  auto it = readout_.find(qubit);
  if (it == readout_.end())
    throw ConfigError("unknown qubit id " + std::to_string(qubit));
  return it->second;
}

double DeviceModel::crosstalk(int observer, int source) const {
  auto it = crosstalk_.find({observer, source});
  return it == crosstalk_.end() ? 0.0 : it->second;
}

bool DeviceModel::has_qubit(int qubit) const {
  return std::binary_search(qubits_.begin(), qubits_.end(), qubit);
}

bool DeviceModel::adjacent(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(a, b));
}

int DeviceModel::distance(int a, int b) const {
  if (!has_qubit(a) || !has_qubit(b))
    throw ConfigError("unknown qubit id " + std::to_string(has_qubit(a) ? b : a));
  if (a == b) return 0;
  std::map<int, int> dist{{a, 0}};
  std::deque<int> frontier{a};
  while (!frontier.empty()) {
    const int q = frontier.front();
    frontier.pop_front();
    for (const auto& [x, y] : edges_) {
      if (x != q && y != q) continue;
      const int other = (x == q) ? y : x;
      if (dist.emplace(other, dist[q] + 1).second) {
        if (other == b) return dist[other];
        frontier.push_back(other);
      }
    }
  }
  throw ConfigError("no path between qubits " + std::to_string(a) + " and " +
                    std::to_string(b));
}

double DeviceModel::decay_per_step() const {
  // t1 may be infinite (noise-free variants); the ratio is then exactly 0.
  return 1.0 - std::exp(-gate_time_ns_ / (t1_us_ * 1000.0));
}

ConfusionPair DeviceModel::effective_confusion(
    int observer, const std::map<int, int>& source_states) const {
  const ConfusionPair& base = readout(observer);
  double shift = 0.0;
  for (const auto& [source, state] : source_states) {
    if (!has_qubit(source))
      throw ConfigError("unknown qubit id " + std::to_string(source));
    if (source == observer)
      throw ConfigError("observer " + std::to_string(observer) +
                        " listed among its own sources");
    if (state != 0 && state != 1)
      throw ConfigError("source state for qubit " + std::to_string(source) +
                        " must be 0 or 1");
    if (state == 1) shift += crosstalk(observer, source);
  }
  return {std::clamp(base.p01 + shift, 0.0, 1.0),
          std::clamp(base.p10 + shift, 0.0, 1.0)};
}

DeviceModel DeviceModel::scaled_crosstalk(double factor) const {
  if (!(factor >= 0.0)) throw ConfigError("crosstalk scale must be >= 0");
  std::map<std::pair<int, int>, double> scaled;
  for (const auto& [pair, gamma] : crosstalk_)
    scaled[pair] = std::clamp(gamma * factor, 0.0, 1.0);
  return DeviceModel(name_, qubits_, edges_, readout_, std::move(scaled),
                     gate_error_, gate_time_ns_, t1_us_);
}

DeviceModel DeviceModel::noiseless() const {
  std::map<int, ConfusionPair> clean;
  for (int q : qubits_) clean[q] = ConfusionPair{0.0, 0.0};
  return DeviceModel(name_, qubits_, edges_, std::move(clean), {}, 0.0,
                     gate_time_ns_, std::numeric_limits<double>::infinity());
}

nlohmann::json DeviceModel::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["qubits"] = qubits_;
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : edges_) j["edges"].push_back({a, b});
  j["readout"] = nlohmann::json::object();
  for (const auto& [q, pair] : readout_)
    j["readout"][std::to_string(q)] = {{"p01", pair.p01}, {"p10", pair.p10}};
  // Keys read "source->observer": the state of the qubit before the arrow
  // shifts the readout of the qubit after it.
  j["crosstalk"] = nlohmann::json::object();
  for (const auto& [pair, gamma] : crosstalk_)
    j["crosstalk"][pair_key(pair.second, pair.first)] = gamma;
  j["gate_error"] = gate_error_;
  j["gate_time_ns"] = gate_time_ns_;
  j["t1_us"] = t1_us_;
  return j;
}

DeviceModel DeviceModel::from_json(const nlohmann::json& j) {
  static const std::set<std::string> kAllowed = {
      "name", "qubits",       "edges",        "readout",
      "crosstalk", "gate_error", "gate_time_ns", "t1_us"};
  if (!j.is_object()) throw ConfigError("calibration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kAllowed.count(key))
      throw ConfigError("unknown field \"" + key + "\" in calibration");
  }
  for (const auto& key : kAllowed)
    if (!j.contains(key))
      throw ConfigError("missing field \"" + key + "\" in calibration");

  try {
    std::vector<int> qubits = j.at("qubits").get<std::vector<int>>();

    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError("each edge must be a pair of qubit ids");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }

    std::map<int, ConfusionPair> readout;
    for (const auto& [key, entry] : j.at("readout").items()) {
      const int q = parse_qubit_id(key, "readout");
      if (!entry.is_object() || entry.size() != 2 || !entry.contains("p01") ||
          !entry.contains("p10"))
        throw ConfigError("readout entry for qubit " + key +
                          " must have exactly p01 and p10");
      readout[q] = {entry.at("p01").get<double>(), entry.at("p10").get<double>()};
    }

    std::map<std::pair<int, int>, double> crosstalk;
    for (const auto& [key, gamma] : j.at("crosstalk").items()) {
      const auto arrow = key.find("->");
      if (arrow == std::string::npos)
        throw ConfigError("crosstalk key \"" + key +
                          "\" must look like \"source->observer\"");
      const int source = parse_qubit_id(key.substr(0, arrow), "crosstalk");
      const int observer = parse_qubit_id(key.substr(arrow + 2), "crosstalk");
      crosstalk[{observer, source}] = gamma.get<double>();
    }

    return DeviceModel(j.at("name").get<std::string>(), std::move(qubits),
                       std::move(edges), std::move(readout),
                       std::move(crosstalk), j.at("gate_error").get<double>(),
                       j.at("gate_time_ns").get<double>(),
                       j.at("t1_us").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("calibration format error: ") + e.what());
  }
}

uint64_t DeviceModel::hash() const { return fnv1a64(to_json().dump()); }

std::string DeviceModel::hash_hex() const {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash();
  return out.str();
}

DeviceModel preset(const std::string& name) {
  std::vector<std::pair<int, int>> edges;
  if (name == "linear5") {
    edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  } else if (name == "tee5") {
    edges = {{0, 1}, {1, 2}, {1, 3}, {3, 4}};
  } else {
    throw ConfigError("unknown preset \"" + name +
                      "\" (available: linear5, tee5)");
  }

  const std::vector<int> qubits = {0, 1, 2, 3, 4};
  std::map<int, ConfusionPair> readout;
  for (int q : qubits) readout[q] = {0.015, 0.04};

  // Crosstalk first needs hop counts, so build a crosstalk-free model.
  DeviceModel bare(name, qubits, edges, readout, {}, 5e-4, 50.0, 100.0);
  constexpr double kGammaAdjacent = 0.010;
  std::map<std::pair<int, int>, double> crosstalk;
  for (int observer : qubits)
    for (int source : qubits) {
      if (observer == source) continue;
      const int d = bare.distance(observer, source);
      crosstalk[{observer, source}] = kGammaAdjacent * std::pow(0.5, d - 1);
    }

  return DeviceModel(name, qubits, edges, std::move(readout),
                     std::move(crosstalk), 5e-4, 50.0, 100.0);
}

DeviceModel load_device(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("calibration parse failure in " + path + ": " + e.what());
  }
  return DeviceModel::from_json(j);
}

}  // namespace qsense
