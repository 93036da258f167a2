#pragma once

#include <array>
#include <complex>

namespace qsense {

// The 24 single-qubit Clifford unitaries with precomputed composition and
// inverse tables. Matrices are canonical representatives generated from
// {H, S}; global phase is fixed by making the first entry of magnitude
// > 0.25 real and positive, so index lookup is exact.
class CliffordTable {
 public:
  static constexpr int kSize = 24;
  static constexpr int kIdentity = 0;
  using Matrix = std::array<std::complex<double>, 4>;  // row-major 2x2

  static const CliffordTable& instance();

  const Matrix& matrix(int g) const;
  int compose(int a, int b) const;  // index of matrix(a) * matrix(b)
  int inverse(int g) const;         // compose(g, inverse(g)) == kIdentity

 private:
  CliffordTable();

  std::array<Matrix, kSize> matrices_;
  std::array<std::array<int, kSize>, kSize> compose_;
  std::array<int, kSize> inverse_;
};

// Range-checked conveniences over the shared table.
int clifford_compose(int a, int b);
int clifford_inverse(int a);
const CliffordTable::Matrix& clifford_matrix(int a);

}  // namespace qsense
