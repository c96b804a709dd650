#include "fmlat/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "fmlat/errors.hpp"

namespace fmlat {

namespace {

constexpr Int kMax = std::numeric_limits<Int>::max();
constexpr Int kMin = std::numeric_limits<Int>::min();

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Int narrow(__int128 value) {
  if (value > kMax || value < kMin) throw OverflowError("integer overflow beyond 64 bits");
  return static_cast<Int>(value);
}

Int checked_add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
  return r;
}

Int checked_sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
  return r;
}

Int checked_mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
  return r;
}

Int checked_neg(Int a) {
  if (a == kMin) throw OverflowError("integer overflow in negation");
  return -a;
}

Int gcd(Int a, Int b) { return narrow(gcd128(a, b)); }

Int lcm(Int a, Int b) {
  if (a == 0 || b == 0) return 0;
  Int g = gcd(a, b);
  return std::abs(checked_mul(a / g, b));
}

Int floor_div(Int a, Int b) {
  if (b == 0) throw PreconditionError("division by zero");
  if (a == kMin && b == -1) throw OverflowError("integer overflow in division");
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Int floor_mod(Int a, Int b) {
  if (b == 0) throw PreconditionError("modulus zero");
  Int m = b < 0 ? checked_neg(b) : b;
  Int r = a % m;
  return r < 0 ? r + m : r;
}

Int mul_mod(Int a, Int b, Int m) {
  __int128 r = (static_cast<__int128>(a) * b) % m;
  if (r < 0) r += m;
  return static_cast<Int>(r);
}

bool is_prime(Int n) {
  if (n < 2) return false;
  for (Int d = 2; d <= n / d; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::vector<std::pair<Int, int>> factorize(Int n) {
  std::vector<std::pair<Int, int>> out;
  __int128 m = n < 0 ? -static_cast<__int128>(n) : n;
  for (Int p = 2; static_cast<__int128>(p) * p <= m; ++p) {
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    if (e > 0) out.emplace_back(p, e);
  }
  if (m > 1) out.emplace_back(narrow(m), 1);
  return out;
}

Int euler_phi(Int n) {
  if (n < 1) throw PreconditionError("euler_phi requires n >= 1");
  Int result = n;
  for (auto [p, e] : factorize(n)) result = result / p * (p - 1);
  return result;
}

bool is_perfect_square(Int n) {
  if (n < 0) return false;
  auto r = static_cast<Int>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<__int128>(r) * r > n) --r;
  while (static_cast<__int128>(r + 1) * (r + 1) <= n) ++r;
  return static_cast<__int128>(r) * r == n;
}

// ---------------------------------------------------------------- Rational

namespace {

Rational make_reduced(__int128 num, __int128 den) {
  if (den == 0) throw PreconditionError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(Int num, Int den) {
  if (den == 0) throw PreconditionError("rational with zero denominator");
  __int128 n = num;
  __int128 d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = narrow(n);
  den_ = narrow(d);
}

Rational Rational::operator-() const { return Rational(checked_neg(num_), den_); }

Rational operator+(const Rational& a, const Rational& b) {
  if (a.den_ == b.den_) return make_reduced(static_cast<__int128>(a.num_) + b.num_, a.den_);
  __int128 g = gcd128(a.den_, b.den_);
  __int128 bd = b.den_ / g;
  __int128 num = static_cast<__int128>(a.num_) * bd + static_cast<__int128>(b.num_) * (a.den_ / g);
  return make_reduced(num, static_cast<__int128>(a.den_) * bd);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  // Cross-reduce first so the 128-bit products stay small.
  Int g1 = gcd(a.num_, b.den_);
  Int g2 = gcd(b.num_, a.den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  __int128 num = static_cast<__int128>(a.num_ / g1) * (b.num_ / g2);
  __int128 den = static_cast<__int128>(a.den_ / g2) * (b.den_ / g1);
  return make_reduced(num, den);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw PreconditionError("division by zero rational");
  return a * Rational(b.den_, b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
  __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
  return lhs <=> rhs;
}

Rational Rational::mod(Int m) const {
  if (m <= 0) throw PreconditionError("modulus must be positive");
  // num/den mod m == (num mod m*den) / den
  __int128 md = static_cast<__int128>(m) * den_;
  __int128 r = num_ % md;
  if (r < 0) r += md;
  return make_reduced(r, den_);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

// ---------------------------------------------------------------- IntMatrix

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<Int>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw PreconditionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<Int>>& rows) {
  IntMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw PreconditionError("ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
  }
  return m;
}

std::vector<Int> IntMatrix::row(std::size_t i) const {
  auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * cols_);
  return {first, first + static_cast<std::ptrdiff_t>(cols_)};
}

std::vector<Int> IntMatrix::col(std::size_t j) const {
  std::vector<Int> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

std::vector<std::vector<Int>> IntMatrix::to_rows() const {
  std::vector<std::vector<Int>> out;
  out.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
  return out;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool IntMatrix::is_symmetric() const {
  if (!is_square()) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

Int IntMatrix::max_abs() const {
  Int m = 0;
  for (Int v : data_) m = std::max(m, v < 0 ? checked_neg(v) : v);
  return m;
}

void IntMatrix::swap_rows(std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t k = 0; k < cols_; ++k) std::swap((*this)(i, k), (*this)(j, k));
}

void IntMatrix::swap_cols(std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t k = 0; k < rows_; ++k) std::swap((*this)(k, i), (*this)(k, j));
}

void IntMatrix::add_row_multiple(std::size_t i, std::size_t j, Int factor) {
  if (factor == 0) return;
  for (std::size_t k = 0; k < cols_; ++k)
    (*this)(i, k) = checked_add((*this)(i, k), checked_mul(factor, (*this)(j, k)));
}

void IntMatrix::add_col_multiple(std::size_t i, std::size_t j, Int factor) {
  if (factor == 0) return;
  for (std::size_t k = 0; k < rows_; ++k)
    (*this)(k, i) = checked_add((*this)(k, i), checked_mul(factor, (*this)(k, j)));
}

void IntMatrix::negate_row(std::size_t i) {
  for (std::size_t k = 0; k < cols_; ++k) (*this)(i, k) = checked_neg((*this)(i, k));
}

void IntMatrix::negate_col(std::size_t j) {
  for (std::size_t k = 0; k < rows_; ++k) (*this)(k, j) = checked_neg((*this)(k, j));
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw PreconditionError("matrix product shape mismatch");
  IntMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      __int128 s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += static_cast<__int128>(a(i, k)) * b(k, j);
      }
      c(i, j) = narrow(s);
    }
  }
  return c;
}

std::vector<Int> operator*(const IntMatrix& a, std::span<const Int> v) {
  if (a.cols() != v.size()) throw PreconditionError("matrix-vector shape mismatch");
  std::vector<Int> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    __int128 s = 0;
    for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<__int128>(a(i, k)) * v[k];
    out[i] = narrow(s);
  }
  return out;
}

IntMatrix congruence(const IntMatrix& g, const IntMatrix& a) { return a.transpose() * (g * a); }

Int bilinear(const IntMatrix& g, std::span<const Int> v, std::span<const Int> w) {
  auto gw = g * w;
  __int128 s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<__int128>(v[i]) * gw[i];
  return narrow(s);
}

Rational bilinear(const IntMatrix& g, std::span<const Rational> v, std::span<const Rational> w) {
  Rational s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].num() == 0) continue;
    Rational row;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (g(i, j) != 0) row += w[j] * Rational(g(i, j));
    }
    s += v[i] * row;
  }
  return s;
}

Int determinant(const IntMatrix& input) {
  if (!input.is_square()) throw PreconditionError("determinant of a non-square matrix");
  const std::size_t n = input.rows();
  if (n == 0) return 1;
  std::vector<__int128> a(input.data().begin(), input.data().end());
  auto at = [&](std::size_t i, std::size_t j) -> __int128& { return a[i * n + j]; };
  int sign = 1;
  __int128 prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        // Every intermediate is a minor of the input, so narrowing to 64 bits
        // after the exact division detects overflow of genuine quantities.
        __int128 lhs = at(i, j) * at(k, k);
        __int128 rhs = at(i, k) * at(k, j);
        at(i, j) = narrow((lhs - rhs) / prev);
      }
    }
    prev = at(k, k);
  }
  return narrow(sign * at(n - 1, n - 1));
}

IntMatrix block_diagonal(const IntMatrix& a, const IntMatrix& b) {
  IntMatrix m(a.rows() + b.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) m(a.rows() + i, a.cols() + j) = b(i, j);
  return m;
}

std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) os << ',';
    os << '[';
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << ']';
  }
  return os << ']';
}

}  // namespace fmlat
