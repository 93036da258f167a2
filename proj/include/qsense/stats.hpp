#pragma once

#include <cstdint>
#include <vector>

#include "qsense/errors.hpp"
#include "qsense/rng.hpp"

namespace qsense::stats {

// Pooled two-outcome frequencies for one qubit. p0 + p1 = 1 within 1e-12.
struct BinaryDistribution {
  double p0 = 1.0;
  double p1 = 0.0;

  static BinaryDistribution from_counts(uint64_t zeros, uint64_t ones);
  std::vector<double> as_vector() const { return {p0, p1}; }
};

// Kullback-Leibler divergence in bits, with 0·log(0/q) = 0. Returns
// +infinity when p has mass where q has none — the caller-visible signal
// for disjoint support; no smoothing is applied.
double kl(const std::vector<double>& p, const std::vector<double>& q);

// Jensen-Shannon distance: square root of the base-2 Jensen-Shannon
// divergence against the even mixture. Always finite, exactly symmetric,
// a metric, and bounded to [0, 1].
double jsd(const std::vector<double>& p, const std::vector<double>& q);
double jsd(const BinaryDistribution& p, const BinaryDistribution& q);

// Nearest-rank percentile (pct in [0, 100]) of an unsorted sample.
double percentile(std::vector<double> values, double pct);

// Binomial draw: exact Bernoulli summation for small n, Gaussian
// approximation with rounding above that (used only for noise-floor
// calibration at pooled counts where the approximation error is negligible).
uint64_t sample_binomial(Rng& rng, uint64_t n, double p);

// Fraction of records whose prediction matches ground truth. Accepts any
// record type exposing `truth` (optional label) and `predicted`.
template <typename Result>
double accuracy(const std::vector<Result>& results) {
  if (results.empty()) throw ConfigError("accuracy: empty result list");
  std::size_t hits = 0;
  for (const auto& r : results) {
    if (!r.truth.has_value())
      throw DataMismatchError("accuracy: result lacks ground truth");
    if (r.predicted == *r.truth) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

}  // namespace qsense::stats
