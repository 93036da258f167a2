#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "qsense/clifford.hpp"
#include "qsense/rng.hpp"
#include "qsense/simulator.hpp"

using namespace qsense;

namespace {

DeviceModel path_device(int n, double p01, double p10, double gate_error,
                        double gate_time_ns = 50.0, double t1_us = 100.0) {
  std::vector<int> qubits;
  std::vector<std::pair<int, int>> edges;
  std::map<int, ConfusionPair> readout;
  for (int q = 0; q < n; ++q) {
    qubits.push_back(q);
    readout[q] = {p01, p10};
    if (q + 1 < n) edges.push_back({q, q + 1});
  }
  return DeviceModel("path", qubits, edges, readout, {}, gate_error,
                     gate_time_ns, t1_us);
}

Circuit single_x(int qubit = 0) {
  Circuit c({qubit});
  c.add_gate(GateKind::kX, qubit, 0);
  c.set_measured({qubit});
  return c;
}

// A circuit with uniformly random gates on `n_qubits` of linear5;
// every qubit gets a gate each timestep so idling is exercised via kI.
Circuit random_circuit(Rng& rng, int n_qubits, int depth) {
  std::vector<int> qubits;
  for (int q = 0; q < n_qubits; ++q) qubits.push_back(q);
  Circuit c(qubits);
  for (int t = 0; t < depth; ++t)
    for (int q : qubits) {
      const uint64_t pick = rng.next_below(3);
      if (pick == 0)
        c.add_gate(GateKind::kI, q, t);
      else if (pick == 1)
        c.add_gate(GateKind::kX, q, t);
      else
        c.add_gate(GateKind::kClifford, q, t,
                   static_cast<int>(rng.next_below(24)));
    }
  c.set_measured(qubits);
  return c;
}

}  // namespace

TEST_CASE("noiseless run reads back the ideal output every shot") {
  const DeviceModel d = preset("linear5").noiseless();
  const Circuit c = build_reference_circuit(d, 0, 1, 1);
  const ShotTable t = run(c, d, 512, 7);
  CHECK(t.shots() == 512);
  for (uint32_t row : t.rows) REQUIRE(row == 0b11u);
  CHECK(t.ones(0) == 512);
  CHECK(t.ones(1) == 512);
}

TEST_CASE("certain readout error inverts the outcome deterministically") {
  const DeviceModel d = path_device(1, 0.0, 1.0, 0.0, 50.0, 1e12);
  const ShotTable t = run(single_x(), d, 256, 3);
  CHECK(t.ones(0) == 0);  // true state 1, always read as 0
  const DeviceModel flip0 = path_device(1, 1.0, 0.0, 0.0, 50.0, 1e12);
  Circuit idle({0});
  idle.add_gate(GateKind::kI, 0, 0);
  idle.set_measured({0});
  CHECK(run(idle, flip0, 256, 3).ones(0) == 256);
}

TEST_CASE("marginal reproduces exact pooled frequencies") {
  ShotTable t;
  t.measured_qubits = {5};
  for (int i = 0; i < 8192; ++i) t.rows.push_back(i < 7741 ? 1u : 0u);
  const auto m = marginal(t, 5);
  CHECK(m.p1 == 7741.0 / 8192.0);
  CHECK(m.p0 == 451.0 / 8192.0);
  CHECK(m.p1 == doctest::Approx(0.9449462890625).epsilon(1e-15));
  CHECK(m.p0 == doctest::Approx(0.0550537109375).epsilon(1e-15));
  CHECK_THROWS_AS(marginal(t, 0), DataMismatchError);
}

TEST_CASE("single-qubit exact distribution matches a hand computation") {
  const DeviceModel d = path_device(1, 0.015, 0.04, 5e-4);
  const OutcomeDistribution dist = exact_distribution(single_x(), d);
  // X prepares 1; depolarizing then relaxation reduce the population;
  // readout mixes in the confusion rates.
  const double decay = 1.0 - std::exp(-50.0 / (100.0 * 1000.0));
  const double p1 = (1.0 - 5e-4 / 2.0) * (1.0 - decay);
  const double read1 = p1 * (1.0 - 0.04) + (1.0 - p1) * 0.015;
  CHECK(dist.probability("1") == doctest::Approx(read1).epsilon(1e-12));
  CHECK(dist.probability("0") == doctest::Approx(1.0 - read1).epsilon(1e-12));
}

TEST_CASE("idle steps relax but are not charged gate error") {
  const DeviceModel d = path_device(1, 0.0, 0.0, 0.3);  // huge gate error
  Circuit with_idle({0});
  with_idle.add_gate(GateKind::kX, 0, 0);
  with_idle.add_gate(GateKind::kI, 0, 1);
  with_idle.set_measured({0});
  const double p_gate_only = one_populations(single_x(), d)[0];
  const double p_idled = one_populations(with_idle, d)[0];
  const double decay = d.decay_per_step();
  // Exactly one extra relaxation step; no second depolarizing hit.
  CHECK(p_idled == doctest::Approx(p_gate_only * (1.0 - decay)).epsilon(1e-12));
}

TEST_CASE("longer idling strictly lowers the excited population") {
  const DeviceModel d = preset("linear5");
  double prev = 1.0;
  for (int idles = 0; idles <= 5; ++idles) {
    Circuit c({0});
    c.add_gate(GateKind::kX, 0, 0);
    for (int t = 1; t <= idles; ++t) c.add_gate(GateKind::kI, 0, t);
    c.set_measured({0});
    const double p1 = one_populations(c, d)[0];
    CHECK(p1 < prev);
    prev = p1;
  }
}

TEST_CASE("sampled frequencies converge to the exact distribution") {
  const DeviceModel d = preset("linear5");
  const Circuit c = build_reference_circuit(d, 0, 1, 1);
  const OutcomeDistribution dist = exact_distribution(c, d);
  const ShotTable t = run(c, d, 1000000, 99, 4);
  for (uint32_t mask = 0; mask < 4; ++mask) {
    uint64_t count = 0;
    for (uint32_t row : t.rows) count += (row == mask);
    CHECK(count / 1e6 ==
          doctest::Approx(dist.probability(mask)).epsilon(0.05).scale(1.0));
  }
  CHECK(tvd(t, dist) < 0.005);
}

TEST_CASE("sampled runs stay within the concentration bound of the oracle") {
  Rng rng(2024);
  const DeviceModel d = preset("linear5");
  for (int i = 0; i < 10; ++i) {
    const Circuit c =
        random_circuit(rng, 1 + static_cast<int>(rng.next_below(3)),
                       1 + static_cast<int>(rng.next_below(10)));
    const ShotTable t = run(c, d, 8192, derive_seed(77, i));
    CHECK(tvd(t, exact_distribution(c, d)) <= 0.03);
  }
}

TEST_CASE("exact distribution is a probability vector") {
  Rng rng(55);
  const DeviceModel d = preset("linear5");
  const Circuit c = random_circuit(rng, 3, 6);
  const OutcomeDistribution dist = exact_distribution(c, d);
  double sum = 0.0;
  for (double p : dist.probabilities()) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dist.probabilities().size() == 8);
}

TEST_CASE("readout crosstalk shifts the exact joint distribution") {
  const DeviceModel d = preset("linear5");
  const DeviceModel off = d.scaled_crosstalk(0.0);
  const Circuit hot = build_reference_circuit(d, 0, 1, 1);
  // Victim excited: adversary sees extra flips only when coupling is on.
  const double with_ct = marginal(exact_distribution(hot, d), 1).p0;
  const double without = marginal(exact_distribution(hot, off), 1).p0;
  CHECK(with_ct - without == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("results are identical at any thread count") {
  const DeviceModel d = preset("linear5");
  const Circuit c = build_reference_circuit(d, 0, 1, 1);
  const ShotTable a = run(c, d, 4096, 31, 1);
  const ShotTable b = run(c, d, 4096, 31, 3);
  const ShotTable w = run(c, d, 4096, 31, 64);
  REQUIRE(a.rows == b.rows);
  REQUIRE(a.rows == w.rows);
}

TEST_CASE("exact oracle rejects wide measurements; sampler does not") {
  const DeviceModel wide = path_device(13, 0.01, 0.01, 0.0);
  std::vector<int> all;
  for (int q = 0; q < 13; ++q) all.push_back(q);
  Circuit c(all);
  for (int q : all) c.add_gate(GateKind::kX, q, 0);
  c.set_measured(all);
  CHECK_THROWS_AS(exact_distribution(c, wide), ConfigError);
  CHECK(run(c, wide, 16, 1).shots() == 16);
}

TEST_CASE("run validates its inputs") {
  const DeviceModel d = preset("linear5");
  Circuit unmeasured({0});
  unmeasured.add_gate(GateKind::kX, 0, 0);
  CHECK_THROWS_AS(run(unmeasured, d, 16, 1), ConfigError);
  const Circuit c = build_reference_circuit(d, 0, 1, 1);
  CHECK_THROWS_AS(run(c, d, 0, 1), ConfigError);
  Circuit foreign({7});
  foreign.add_gate(GateKind::kX, 7, 0);
  foreign.set_measured({7});
  CHECK_THROWS_AS(run(foreign, d, 16, 1), ConfigError);
}

TEST_CASE("ideal output rejects superposed qubits") {
  const DeviceModel d = preset("linear5");
  // Find a Hadamard-like element: it maps |0> to an even superposition.
  int hadamard = -1;
  for (int g = 0; g < 24; ++g) {
    const auto& m = clifford_matrix(g);
    if (std::abs(std::abs(m[0]) - std::abs(m[2])) < 1e-9 &&
        std::abs(m[0]) > 0.1) {
      hadamard = g;
      break;
    }
  }
  REQUIRE(hadamard >= 0);
  Circuit c({0});
  c.add_gate(GateKind::kClifford, 0, 0, hadamard);
  c.set_measured({0});
  CHECK_THROWS_AS(ideal_output(c), DataMismatchError);
}

TEST_CASE("shot tables render stable csv and summary forms") {
  const DeviceModel d = preset("linear5").noiseless();
  const Circuit c = build_reference_circuit(d, 0, 1, 0);
  const ShotTable t = run(c, d, 4, 9);
  std::ostringstream csv;
  t.to_csv(csv);
  const std::string text = csv.str();
  CHECK(text.find("# circuit " + c.id()) == 0);
  CHECK(text.find("shot,outcome") != std::string::npos);
  CHECK(text.find("0,01") != std::string::npos);  // victim 0, adversary 1
  const nlohmann::json summary = t.to_summary_json();
  CHECK(summary.at("shots") == 4);
  CHECK(summary.at("counts").at("01") == 4);
  CHECK(t.row_string(0) == "01");
}

TEST_CASE("distribution lookups validate masks and bitstrings") {
  OutcomeDistribution dist({0, 1}, {0.25, 0.25, 0.25, 0.25});
  CHECK(dist.probability("10") == 0.25);
  CHECK_THROWS_AS(dist.probability("101"), DataMismatchError);
  CHECK_THROWS_AS(dist.probability("1x"), DataMismatchError);
  CHECK_THROWS_AS(dist.probability(4u), DataMismatchError);
  CHECK_THROWS_AS(OutcomeDistribution({0}, {0.5, 0.6}), DataMismatchError);
  CHECK_THROWS_AS(OutcomeDistribution({0}, {1.5, -0.5}), DataMismatchError);
  CHECK_THROWS_AS(OutcomeDistribution({0}, {0.5}), DataMismatchError);
}
