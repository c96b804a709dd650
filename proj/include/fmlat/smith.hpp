#pragma once

#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fmlat/arith.hpp"

namespace fmlat {

using BigInt = boost::multiprecision::cpp_int;

/// Dense row-major matrix of arbitrary-precision integers. Smith transforms
/// can outgrow 64 bits even when the input and the diagonal are tiny.
class BigMatrix {
 public:
  BigMatrix() = default;
  BigMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit BigMatrix(const IntMatrix& m);

  static BigMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  BigInt& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  /// Entry as Int; throws OverflowError if it does not fit.
  Int entry(std::size_t i, std::size_t j) const;
  /// Whole matrix as IntMatrix; throws OverflowError if any entry does not fit.
  IntMatrix narrow() const;
  /// Bit length of the largest absolute entry.
  std::size_t max_bits() const;

  friend bool operator==(const BigMatrix&, const BigMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<BigInt> data_;
};

BigMatrix operator*(const BigMatrix& a, const BigMatrix& b);

/// left · input · right = diag(diagonal), with left/right unimodular and the
/// diagonal a divisibility chain d_1 | d_2 | ... (trailing zeros for rank
/// deficiency). The inverses of both transforms are tracked alongside so that
/// callers never need to invert an integer matrix.
struct SmithDecomposition {
  BigMatrix left;
  std::vector<Int> diagonal;  // length min(rows, cols), entries >= 0
  BigMatrix right;
  BigMatrix left_inverse;
  BigMatrix right_inverse;

  /// Number of nonzero diagonal entries.
  std::size_t rank() const;
  IntMatrix diagonal_matrix(std::size_t rows, std::size_t cols) const;
};

/// Deterministic: the pivot at each stage is the entry of smallest nonzero
/// absolute value in the remaining block, ties broken by (row, col). The
/// transforms are then size-reduced using the moves (left, right) ↦
/// (U·left, right·V) with U·D·V = D. Throws OverflowError only if a diagonal
/// entry does not fit in Int.
SmithDecomposition smith_normal_form(const IntMatrix& m);

}  // namespace fmlat
