#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fmlat {

using Int = std::int64_t;

// Checked 64-bit arithmetic. Every helper throws OverflowError instead of
// wrapping.
Int checked_add(Int a, Int b);
Int checked_sub(Int a, Int b);
Int checked_mul(Int a, Int b);
Int checked_neg(Int a);
Int narrow(__int128 value);

Int gcd(Int a, Int b);  // always >= 0
Int lcm(Int a, Int b);  // always >= 0, checked
Int floor_div(Int a, Int b);
Int floor_mod(Int a, Int b);  // in [0, |b|)
Int mul_mod(Int a, Int b, Int m);  // (a*b) mod m in [0, m), m > 0

bool is_prime(Int n);
/// Prime factorisation of |n| as (prime, exponent) pairs, ascending.
std::vector<std::pair<Int, int>> factorize(Int n);
Int euler_phi(Int n);
bool is_perfect_square(Int n);

/// Exact reduced fraction with a positive denominator.
class Rational {
 public:
  Rational() = default;
  Rational(Int value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(Int num, Int den);

  Int num() const { return num_; }
  Int den() const { return den_; }
  bool is_integer() const { return den_ == 1; }

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }
  Int floor() const { return floor_div(num_, den_); }

  /// Canonical representative of this value modulo the integer m > 0, in [0, m).
  Rational mod(Int m) const;

  /// "p/q", or "p" when integral.
  std::string str() const;

 private:
  Int num_ = 0;
  Int den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Dense row-major integer matrix with checked arithmetic.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols, Int fill = 0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  IntMatrix(std::initializer_list<std::initializer_list<Int>> rows);

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_rows(const std::vector<std::vector<Int>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  Int& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Int operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<Int> row(std::size_t i) const;
  std::vector<Int> col(std::size_t j) const;
  std::vector<std::vector<Int>> to_rows() const;

  IntMatrix transpose() const;
  bool is_symmetric() const;
  Int max_abs() const;

  void swap_rows(std::size_t i, std::size_t j);
  void swap_cols(std::size_t i, std::size_t j);
  /// row i += factor * row j
  void add_row_multiple(std::size_t i, std::size_t j, Int factor);
  /// col i += factor * col j
  void add_col_multiple(std::size_t i, std::size_t j, Int factor);
  void negate_row(std::size_t i);
  void negate_col(std::size_t j);

  friend bool operator==(const IntMatrix& a, const IntMatrix& b) = default;
  friend auto operator<=>(const IntMatrix& a, const IntMatrix& b) {
    if (auto c = a.rows_ <=> b.rows_; c != 0) return c;
    if (auto c = a.cols_ <=> b.cols_; c != 0) return c;
    return a.data_ <=> b.data_;
  }

  const std::vector<Int>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Int> data_;
};

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
std::vector<Int> operator*(const IntMatrix& a, std::span<const Int> v);
/// aᵀ·g·a
IntMatrix congruence(const IntMatrix& g, const IntMatrix& a);
/// vᵀ·g·w
Int bilinear(const IntMatrix& g, std::span<const Int> v, std::span<const Int> w);
Rational bilinear(const IntMatrix& g, std::span<const Rational> v, std::span<const Rational> w);

/// Exact determinant by Bareiss fraction-free elimination.
Int determinant(const IntMatrix& m);

/// Block-diagonal sum.
IntMatrix block_diagonal(const IntMatrix& a, const IntMatrix& b);

std::ostream& operator<<(std::ostream& os, const IntMatrix& m);

}  // namespace fmlat
