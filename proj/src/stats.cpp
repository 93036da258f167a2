#include "qsense/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qsense::stats {

BinaryDistribution BinaryDistribution::from_counts(uint64_t zeros,
                                                   uint64_t ones) {
  const uint64_t total = zeros + ones;
  if (total == 0) throw ConfigError("BinaryDistribution: zero total count");
  return {static_cast<double>(zeros) / static_cast<double>(total),
          static_cast<double>(ones) / static_cast<double>(total)};
}

namespace {

void check_support(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.empty() || p.size() != q.size())
    throw DataMismatchError("distribution support mismatch");
}

}  // namespace

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  check_support(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += p[i] * std::log2(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative residue when p ~ q; KL is >= 0.
  return std::max(sum, 0.0);
}

double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  check_support(p, q);
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  // m dominates both p and q, so both KL terms are finite. The additions
  // here commute exactly, which is what makes jsd(p,q) == jsd(q,p) bitwise.
  const double divergence = 0.5 * (kl(p, m) + kl(q, m));
  return std::min(std::sqrt(std::max(divergence, 0.0)), 1.0);
}

double jsd(const BinaryDistribution& p, const BinaryDistribution& q) {
  return jsd(p.as_vector(), q.as_vector());
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ConfigError("percentile: empty sample");
  if (pct < 0.0 || pct > 100.0)
    throw ConfigError("percentile: pct out of range");
  std::sort(values.begin(), values.end());
  std::size_t rank =
      static_cast<std::size_t>(std::ceil(pct / 100.0 * values.size()));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

uint64_t sample_binomial(Rng& rng, uint64_t n, double p) {
  if (p <= 0.0 || n == 0) return 0;
  if (p >= 1.0) return n;
  if (n < 256) {
    uint64_t k = 0;
    for (uint64_t i = 0; i < n; ++i) k += rng.next_bool(p) ? 1 : 0;
    return k;
  }
  // Box-Muller; u1 shifted away from 0 so the log is finite.
  const double u1 = 1.0 - rng.next_double();
  const double u2 = rng.next_double();
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(mean * (1.0 - p));
  const long long k = std::llround(mean + z * sd);
  if (k < 0) return 0;
  if (k > static_cast<long long>(n)) return n;
  return static_cast<uint64_t>(k);
}

}  // namespace qsense::stats
