#include "qsense/clifford.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

#include "qsense/errors.hpp"

namespace qsense {

namespace {

using Matrix = CliffordTable::Matrix;

Matrix multiply(const Matrix& a, const Matrix& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Matrix adjoint(const Matrix& a) {
  return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
}

// Removes the global phase: the first entry with magnitude > 0.25 (one of
// the first two always qualifies for a unitary) is rotated to the positive
// real axis. Two Cliffords equal up to phase then canonicalize identically.
Matrix canonicalize(const Matrix& m) {
  for (const auto& entry : m) {
    const double mag = std::abs(entry);
    if (mag > 0.25) {
      const std::complex<double> phase = std::conj(entry) / mag;
      return {m[0] * phase, m[1] * phase, m[2] * phase, m[3] * phase};
    }
  }
  throw std::logic_error("matrix is not unitary");
}

// Entries of canonical Cliffords sit on a coarse grid (magnitudes 0, 1/2,
// 1/sqrt2, 1; phases multiples of pi/4), so micro-unit rounding gives an
// exact, collision-free key.
using Key = std::array<long long, 8>;

Key key_of(const Matrix& m) {
  Key k{};
  for (int i = 0; i < 4; ++i) {
    k[2 * i] = std::llround(m[i].real() * 1e6);
    k[2 * i + 1] = std::llround(m[i].imag() * 1e6);
  }
  return k;
}

}  // namespace

CliffordTable::CliffordTable() {
  const double s = 1.0 / std::sqrt(2.0);
  const Matrix kIdentityMatrix = {1.0, 0.0, 0.0, 1.0};
  const Matrix kHadamard = {s, s, s, -s};
  const Matrix kPhase = {1.0, 0.0, 0.0, std::complex<double>(0.0, 1.0)};

  // Breadth-first closure of <H, S> starting from the identity, which
  // therefore lands at index 0.
  std::map<Key, int> index;
  std::deque<int> frontier;
  int count = 0;
  auto visit = [&](const Matrix& m) {
    const Matrix canon = canonicalize(m);
    if (index.emplace(key_of(canon), count).second) {
      if (count >= kSize) throw std::logic_error("Clifford closure exceeds 24");
      matrices_[count] = canon;
      frontier.push_back(count);
      ++count;
    }
  };
  visit(kIdentityMatrix);
  while (!frontier.empty()) {
    const Matrix m = matrices_[frontier.front()];
    frontier.pop_front();
    visit(multiply(m, kHadamard));
    visit(multiply(m, kPhase));
  }
  if (count != kSize) throw std::logic_error("Clifford closure incomplete");

  auto find = [&](const Matrix& m) {
    auto it = index.find(key_of(canonicalize(m)));
    if (it == index.end()) throw std::logic_error("product left the group");
    return it->second;
  };
  for (int a = 0; a < kSize; ++a) {
    for (int b = 0; b < kSize; ++b)
      compose_[a][b] = find(multiply(matrices_[a], matrices_[b]));
    inverse_[a] = find(adjoint(matrices_[a]));
  }
}

const CliffordTable& CliffordTable::instance() {
  static const CliffordTable table;
  return table;
}

const CliffordTable::Matrix& CliffordTable::matrix(int g) const {
  if (g < 0 || g >= kSize)
    throw ConfigError("Clifford index out of range: " + std::to_string(g));
  return matrices_[g];
}

int CliffordTable::compose(int a, int b) const {
  if (a < 0 || a >= kSize || b < 0 || b >= kSize)
    throw ConfigError("Clifford index out of range: " +
                      std::to_string(a < 0 || a >= kSize ? a : b));
  return compose_[a][b];
}

int CliffordTable::inverse(int g) const {
  if (g < 0 || g >= kSize)
    throw ConfigError("Clifford index out of range: " + std::to_string(g));
  return inverse_[g];
}

int clifford_compose(int a, int b) {
  return CliffordTable::instance().compose(a, b);
}

int clifford_inverse(int a) { return CliffordTable::instance().inverse(a); }

const CliffordTable::Matrix& clifford_matrix(int a) {
  return CliffordTable::instance().matrix(a);
}

}  // namespace qsense
