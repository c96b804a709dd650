#include "fmlat/smith.hpp"

#include <optional>
#include <utility>

#include "fmlat/errors.hpp"

namespace fmlat {

BigMatrix::BigMatrix(const IntMatrix& m) : BigMatrix(m.rows(), m.cols()) {
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = m(i, j);
}

BigMatrix BigMatrix::identity(std::size_t n) {
  BigMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

namespace {

Int to_int(const BigInt& v) {
  if (v > std::numeric_limits<Int>::max() || v < std::numeric_limits<Int>::min())
    throw OverflowError("Smith transform entry exceeds 64 bits");
  return static_cast<Int>(v);
}

}  // namespace

Int BigMatrix::entry(std::size_t i, std::size_t j) const { return to_int((*this)(i, j)); }

IntMatrix BigMatrix::narrow() const {
  IntMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(i, j) = entry(i, j);
  return out;
}

std::size_t BigMatrix::max_bits() const {
  std::size_t bits = 0;
  for (const auto& v : data_)
    if (v != 0) bits = std::max<std::size_t>(bits, boost::multiprecision::msb(abs(v)) + 1);
  return bits;
}

BigMatrix operator*(const BigMatrix& a, const BigMatrix& b) {
  if (a.cols() != b.rows()) throw PreconditionError("matrix shapes do not match");
  BigMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

namespace {

struct Pos {
  std::size_t row;
  std::size_t col;
};

// Nearest integer to -b/a for a > 0.
BigInt rounded_step(const BigInt& b, const BigInt& a) {
  BigInt num = 2 * b + a;
  BigInt den = 2 * a;
  BigInt q = num / den;
  if (num % den != 0 && num < 0) q -= 1;  // floor
  return -q;
}

// Row/column operations applied to the working matrix and mirrored on the
// transforms and their inverses.
class Reducer {
 public:
  explicit Reducer(const IntMatrix& m)
      : a_(m),
        left_(BigMatrix::identity(m.rows())),
        left_inv_(BigMatrix::identity(m.rows())),
        right_(BigMatrix::identity(m.cols())),
        right_inv_(BigMatrix::identity(m.cols())) {}

  SmithDecomposition run() {
    const std::size_t n = std::min(a_.rows(), a_.cols());
    for (std::size_t s = 0; s < n; ++s) {
      for (;;) {
        auto pivot = smallest_pivot(s);
        if (!pivot) return finish();
        swap_rows(s, pivot->row);
        swap_cols(s, pivot->col);
        if (!reduce_cross(s)) continue;
        auto bad = first_non_divisible_row(s);
        if (!bad) break;
        add_row(s, *bad, 1);
      }
      if (a_(s, s) < 0) negate_row(s);
    }
    return finish();
  }

 private:
  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t k = 0; k < a_.cols(); ++k) std::swap(a_(i, k), a_(j, k));
    for (std::size_t k = 0; k < a_.rows(); ++k) {
      std::swap(left_(i, k), left_(j, k));
      std::swap(left_inv_(k, i), left_inv_(k, j));
    }
  }

  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t k = 0; k < a_.rows(); ++k) std::swap(a_(k, i), a_(k, j));
    for (std::size_t k = 0; k < a_.cols(); ++k) {
      std::swap(right_(k, i), right_(k, j));
      std::swap(right_inv_(i, k), right_inv_(j, k));
    }
  }

  // row i += q * row j
  void add_row(std::size_t i, std::size_t j, const BigInt& q) {
    if (q == 0) return;
    for (std::size_t k = 0; k < a_.cols(); ++k) a_(i, k) += q * a_(j, k);
    add_left_row(i, j, q);
  }

  // col i += q * col j
  void add_col(std::size_t i, std::size_t j, const BigInt& q) {
    if (q == 0) return;
    for (std::size_t k = 0; k < a_.rows(); ++k) a_(k, i) += q * a_(k, j);
    add_right_col(i, j, q);
  }

  void add_left_row(std::size_t i, std::size_t j, const BigInt& q) {
    for (std::size_t k = 0; k < left_.cols(); ++k) {
      left_(i, k) += q * left_(j, k);
      left_inv_(k, j) -= q * left_inv_(k, i);
    }
  }

  void add_right_col(std::size_t i, std::size_t j, const BigInt& q) {
    for (std::size_t k = 0; k < right_.rows(); ++k) {
      right_(k, i) += q * right_(k, j);
      right_inv_(j, k) -= q * right_inv_(i, k);
    }
  }

  void negate_row(std::size_t i) {
    for (std::size_t k = 0; k < a_.cols(); ++k) a_(i, k) = -a_(i, k);
    for (std::size_t k = 0; k < a_.rows(); ++k) {
      left_(i, k) = -left_(i, k);
      left_inv_(k, i) = -left_inv_(k, i);
    }
  }

  std::optional<Pos> smallest_pivot(std::size_t s) const {
    std::optional<Pos> best;
    BigInt best_abs = 0;
    for (std::size_t i = s; i < a_.rows(); ++i) {
      for (std::size_t j = s; j < a_.cols(); ++j) {
        if (a_(i, j) == 0) continue;
        BigInt av = abs(a_(i, j));
        if (!best || av < best_abs) {
          best = Pos{i, j};
          best_abs = av;
        }
      }
    }
    return best;
  }

  // Clears row s and column s outside the pivot by Euclidean steps (truncated
  // quotients). Returns true when both are fully cleared.
  bool reduce_cross(std::size_t s) {
    bool clear = true;
    const BigInt p = a_(s, s);
    for (std::size_t i = s + 1; i < a_.rows(); ++i) {
      if (a_(i, s) == 0) continue;
      add_row(i, s, -(a_(i, s) / p));
      if (a_(i, s) != 0) clear = false;
    }
    for (std::size_t j = s + 1; j < a_.cols(); ++j) {
      if (a_(s, j) == 0) continue;
      add_col(j, s, -(a_(s, j) / p));
      if (a_(s, j) != 0) clear = false;
    }
    return clear;
  }

  std::optional<std::size_t> first_non_divisible_row(std::size_t s) const {
    const BigInt& p = a_(s, s);
    for (std::size_t i = s + 1; i < a_.rows(); ++i)
      for (std::size_t j = s + 1; j < a_.cols(); ++j)
        if (a_(i, j) % p != 0) return i;
    return std::nullopt;
  }

  BigInt diag(std::size_t i) const {
    return i < std::min(a_.rows(), a_.cols()) ? a_(i, i) : BigInt(0);
  }

  BigInt row_dot(const BigMatrix& m, std::size_t i, std::size_t j) const {
    BigInt s = 0;
    for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * m(j, k);
    return s;
  }

  BigInt col_dot(const BigMatrix& m, std::size_t i, std::size_t j) const {
    BigInt s = 0;
    for (std::size_t k = 0; k < m.rows(); ++k) s += m(k, i) * m(k, j);
    return s;
  }

  // Greedy pairwise size reduction of the transforms. Moves:
  //  * left row p += X·row q when d_q = 0 (U·D = D);
  //  * left row p += x·(d_p/g)·row q together with right col q -= x·(d_q/g)·col p,
  //    g = gcd(d_p, d_q), when d_p, d_q > 0;
  //  * right col p += x·col q when d_q = 0.
  // A move is applied only if it strictly lowers the summed squared entries.
  void size_reduce() {
    const std::size_t m = a_.rows();
    const std::size_t n = a_.cols();
    for (int sweep = 0; sweep < 64; ++sweep) {
      bool changed = false;
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = 0; q < m; ++q) {
          if (p == q) continue;
          const BigInt dp = diag(p), dq = diag(q);
          if (dq == 0) {
            const BigInt a = row_dot(left_, q, q);
            if (a == 0) continue;
            const BigInt b = row_dot(left_, p, q);
            const BigInt x = rounded_step(b, a);
            if (x != 0 && a * x * x + 2 * b * x < 0) {
              add_left_row(p, q, x);
              changed = true;
            }
            continue;
          }
          if (dp == 0) continue;
          const BigInt g = gcd(dp, dq);
          const BigInt s = dp / g, f = dq / g;
          const BigInt a = s * s * row_dot(left_, q, q) + f * f * col_dot(right_, p, p);
          const BigInt b = s * row_dot(left_, p, q) - f * col_dot(right_, q, p);
          const BigInt x = rounded_step(b, a);
          if (x != 0 && a * x * x + 2 * b * x < 0) {
            add_left_row(p, q, x * s);
            add_right_col(q, p, -x * f);
            changed = true;
          }
        }
      }
      for (std::size_t q = 0; q < n; ++q) {
        if (diag(q) != 0) continue;
        const BigInt a = col_dot(right_, q, q);
        for (std::size_t p = 0; p < n; ++p) {
          if (p == q) continue;
          const BigInt b = col_dot(right_, p, q);
          const BigInt x = rounded_step(b, a);
          if (x != 0 && a * x * x + 2 * b * x < 0) {
            add_right_col(p, q, x);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
  }

  static BigInt gcd(BigInt a, BigInt b) {
    while (b != 0) {
      BigInt t = a % b;
      a = std::move(b);
      b = std::move(t);
    }
    return abs(a);
  }

  SmithDecomposition finish() {
    size_reduce();
    const std::size_t n = std::min(a_.rows(), a_.cols());
    SmithDecomposition out;
    out.diagonal.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (a_(i, i) > std::numeric_limits<Int>::max())
        throw OverflowError("Smith diagonal entry exceeds 64 bits");
      out.diagonal[i] = static_cast<Int>(a_(i, i));
    }
    out.left = std::move(left_);
    out.right = std::move(right_);
    out.left_inverse = std::move(left_inv_);
    out.right_inverse = std::move(right_inv_);
    return out;
  }

  BigMatrix a_;
  BigMatrix left_;
  BigMatrix left_inv_;
  BigMatrix right_;
  BigMatrix right_inv_;
};

}  // namespace

std::size_t SmithDecomposition::rank() const {
  std::size_t r = 0;
  for (Int d : diagonal)
    if (d != 0) ++r;
  return r;
}

IntMatrix SmithDecomposition::diagonal_matrix(std::size_t rows, std::size_t cols) const {
  IntMatrix d(rows, cols);
  for (std::size_t i = 0; i < diagonal.size(); ++i) d(i, i) = diagonal[i];
  return d;
}

SmithDecomposition smith_normal_form(const IntMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    SmithDecomposition out;
    out.left = out.left_inverse = BigMatrix::identity(m.rows());
    out.right = out.right_inverse = BigMatrix::identity(m.cols());
    return out;
  }
  return Reducer(m).run();
}

}  // namespace fmlat
