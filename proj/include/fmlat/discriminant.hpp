#pragma once

#include <span>
#include <vector>

#include "fmlat/arith.hpp"
#include "fmlat/fqf.hpp"
#include "fmlat/lattice.hpp"

namespace fmlat {

/// A_L = L*/L as a direct sum of cyclic groups Z/d_i (d_i > 1, a divisibility
/// chain), with a lift of each generator to L* ⊂ L ⊗ Q.
///
/// Built from the Smith form left·G·right = diag(d): the lift of generator i is
/// column i of `right` divided by d_i, and an element x ∈ L* has coordinates
/// left·(G·x) reduced mod d.
class DiscriminantGroup {
 public:
  explicit DiscriminantGroup(const Lattice& lattice);

  const std::vector<Int>& cyclic_orders() const { return orders_; }
  /// Rational coordinates in the basis of L, one vector per generator.
  const std::vector<std::vector<Rational>>& generator_lifts() const { return lifts_; }
  Int order() const;

  /// Coordinates in A_L of x ∈ L*, given in the basis of L. Throws
  /// PreconditionError when x is not in the dual lattice.
  Coords coordinates_of(std::span<const Rational> dual_vector) const;
  /// A lift of the element with the given coordinates.
  std::vector<Rational> lift(std::span<const Int> coords) const;

 private:
  IntMatrix gram_;
  IntMatrix reduction_;  // rows of `left` belonging to the nontrivial factors
  std::vector<Int> orders_;
  std::vector<std::vector<Rational>> lifts_;
};

/// discriminant_group(L) for nondegenerate L.
DiscriminantGroup discriminant_group(const Lattice& lattice);

/// (A_L, q_L) on the generators of discriminant_group(L). Requires an even
/// lattice: q_L is only well defined mod 2 in that case.
FiniteQuadraticForm discriminant_form(const Lattice& lattice);

/// b_L on generator pairs, values in [0, 1). Defined for odd lattices as well.
std::vector<std::vector<Rational>> discriminant_bilinear_form(const Lattice& lattice);

struct PAnalysis {
  Int p = 0;
  bool is_p_elementary = false;
  std::size_t a = 0;    // A_L ≅ (Z/p)^a when p-elementary, else 0
  std::size_t l_p = 0;  // number of cyclic factors of the p-part
};

PAnalysis p_analysis(const Lattice& lattice, Int p);
/// Number of cyclic factors of the p-part of a group with the given orders.
std::size_t p_length(const std::vector<Int>& orders, Int p);

}  // namespace fmlat
