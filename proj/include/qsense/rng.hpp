#pragma once

#include <cstdint>
#include <string_view>

namespace qsense {

// SplitMix64 output scrambler. Maps any 64-bit value to a well-mixed one;
// also used to derive independent child seeds from a parent seed.
constexpr uint64_t splitmix_finalize(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Child seed for stream `key` of a run seeded with `seed`. key+1 keeps
// key 0 distinct from the parent stream itself.
constexpr uint64_t derive_seed(uint64_t seed, uint64_t key) {
  return splitmix_finalize(seed + 0x9E3779B97F4A7C15ull * (key + 1));
}

// FNV-1a over bytes; used both for content hashes and stream labels.
constexpr uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Hash of a label, so named substreams ("mask", "floor", ...) can be
// derived without a registry of integer keys.
constexpr uint64_t stream_label(std::string_view name) { return fnv1a64(name); }

// Counter-based SplitMix64 generator. Cheap to construct, so simulation code
// creates one per shot from derive_seed(run_seed, shot_index); results are
// then independent of how shots are split across threads.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return splitmix_finalize(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool next_bool(double p_true) { return next_double() < p_true; }

  // Uniform in [0, n). Rejection-free modulo is fine here: n is always tiny
  // (gate indices, qubit counts) so the bias is < 2^-59.
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

 private:
  uint64_t state_;
};

}  // namespace qsense
