#pragma once

// Shared helpers for the unit tests: seeded randomness and small brute-force
// oracles that avoid the library code paths they check.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "fmlat/arith.hpp"
#include "fmlat/lattice.hpp"

namespace fmlat::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20261019);
  return engine;
}

inline Int uniform(Int lo, Int hi) { return std::uniform_int_distribution<Int>(lo, hi)(rng()); }

inline IntMatrix random_matrix(std::size_t rows, std::size_t cols, Int bound) {
  IntMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = uniform(-bound, bound);
  return m;
}

/// Product of random elementary operations; entries stay small for few steps.
inline IntMatrix random_unimodular(std::size_t n, int steps = 6) {
  IntMatrix u = IntMatrix::identity(n);
  if (n < 2) return u;
  for (int s = 0; s < steps; ++s) {
    std::size_t i = static_cast<std::size_t>(uniform(0, static_cast<Int>(n) - 1));
    std::size_t j = static_cast<std::size_t>(uniform(0, static_cast<Int>(n) - 2));
    if (j >= i) ++j;
    u.add_col_multiple(i, j, uniform(-1, 1) == 0 ? 1 : -1);
    if (uniform(0, 3) == 0) u.swap_cols(i, j);
  }
  return u;
}

/// Cofactor expansion along the first row.
inline __int128 laplace_det(const std::vector<std::vector<Int>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1;
  if (n == 1) return m[0][0];
  __int128 total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (m[0][c] == 0) continue;
    std::vector<std::vector<Int>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Int> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(row);
    }
    const __int128 term = static_cast<__int128>(m[0][c]) * laplace_det(minor);
    total += (c % 2 == 0) ? term : -term;
  }
  return total;
}

inline Int laplace_det(const IntMatrix& m) { return static_cast<Int>(laplace_det(m.to_rows())); }

inline __int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// Smith divisors from determinantal divisors: D_k = gcd of all k×k minors and
/// d_k = D_k / D_{k-1}.
inline std::vector<Int> determinantal_divisors(const IntMatrix& m) {
  const std::size_t n = std::min(m.rows(), m.cols());
  std::vector<Int> out;
  __int128 previous = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    __int128 g = 0;
    std::vector<bool> rs(m.rows(), false), cs(m.cols(), false);
    std::fill(rs.begin(), rs.begin() + static_cast<long>(k), true);
    do {
      std::fill(cs.begin(), cs.end(), false);
      std::fill(cs.begin(), cs.begin() + static_cast<long>(k), true);
      do {
        std::vector<std::vector<Int>> minor;
        for (std::size_t i = 0; i < m.rows(); ++i) {
          if (!rs[i]) continue;
          std::vector<Int> row;
          for (std::size_t j = 0; j < m.cols(); ++j)
            if (cs[j]) row.push_back(m(i, j));
          minor.push_back(row);
        }
        g = gcd128(g, laplace_det(minor));
      } while (std::prev_permutation(cs.begin(), cs.end()));
    } while (std::prev_permutation(rs.begin(), rs.end()));
    if (g == 0) {
      out.push_back(0);
      previous = 0;
      continue;
    }
    out.push_back(previous == 0 ? 0 : static_cast<Int>(g / previous));
    previous = g;
  }
  return out;
}

/// Random even lattice assembled from constructor blocks, rank ≤ max_rank.
inline Lattice random_even_block_sum(std::size_t max_rank) {
  for (;;) {
    std::vector<Lattice> parts;
    std::size_t rank = 0;
    const int count = static_cast<int>(uniform(1, 4));
    for (int i = 0; i < count; ++i) {
      const Int kind = uniform(0, 2);
      Int scale = uniform(1, 4) * (uniform(0, 1) == 0 ? 1 : -1);
      if (kind == 0 && rank + 2 <= max_rank) {
        parts.push_back(Lattice::hyperbolic(scale));
        rank += 2;
      } else if (kind == 1 && rank + 8 <= max_rank) {
        parts.push_back(Lattice::e8(uniform(0, 1) == 0 ? -1 : (uniform(0, 1) == 0 ? 2 : -2)));
        rank += 8;
      } else if (rank + 1 <= max_rank) {
        parts.push_back(Lattice::rank_one(2 * scale));
        rank += 1;
      }
    }
    if (parts.empty()) continue;
    Lattice out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) out = direct_sum(out, parts[i]);
    return out;
  }
}

// Permutations of {0..n-1}; (a*b)(i) = a(b(i)).
struct Perm {
  std::vector<int> p;
  Perm operator*(const Perm& o) const {
    Perm r{std::vector<int>(p.size())};
    for (std::size_t i = 0; i < p.size(); ++i) r.p[i] = p[static_cast<std::size_t>(o.p[i])];
    return r;
  }
  Perm inverse() const {
    Perm r{std::vector<int>(p.size())};
    for (std::size_t i = 0; i < p.size(); ++i) r.p[static_cast<std::size_t>(p[i])] = static_cast<int>(i);
    return r;
  }
  friend bool operator==(const Perm&, const Perm&) = default;
  friend auto operator<=>(const Perm&, const Perm&) = default;
};

inline Perm random_perm(int n) {
  Perm r{std::vector<int>(static_cast<std::size_t>(n))};
  std::iota(r.p.begin(), r.p.end(), 0);
  std::shuffle(r.p.begin(), r.p.end(), rng());
  return r;
}

inline std::vector<Perm> closure(const std::vector<Perm>& gens, int n) {
  Perm id{std::vector<int>(static_cast<std::size_t>(n))};
  std::iota(id.p.begin(), id.p.end(), 0);
  std::set<Perm> seen{id};
  std::vector<Perm> frontier{id};
  while (!frontier.empty()) {
    std::vector<Perm> next;
    for (const auto& a : frontier)
      for (const auto& g : gens)
        if (seen.insert(g * a).second) next.push_back(g * a);
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

// Orbits of H × K on G, joining g with h·g and g·k for generators only.
inline std::size_t union_find_double_cosets(const std::vector<Perm>& g, const std::vector<Perm>& h_gens,
                                     const std::vector<Perm>& k_gens) {
  std::vector<std::size_t> parent(g.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto index = [&](const Perm& x) {
    return static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), x) - g.begin());
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const auto& h : h_gens) parent[find(i)] = find(index(h * g[i]));
    for (const auto& k : k_gens) parent[find(i)] = find(index(g[i] * k));
  }
  std::size_t roots = 0;
  for (std::size_t i = 0; i < g.size(); ++i) roots += find(i) == i;
  return roots;
}

}  // namespace fmlat::testing
