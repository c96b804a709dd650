#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmlat/arith.hpp"

namespace fmlat {

using Coords = std::vector<Int>;

/// A finite quadratic form on A = ⊕ Z/d_i with fixed generators g_i.
///
/// q takes values in Q/2Z and b in Q/Z. Internally all values share one
/// denominator, so q(x) is stored as an integer numerator mod 2·denominator and
/// b(x, y) as a numerator mod denominator.
class FiniteQuadraticForm {
 public:
  FiniteQuadraticForm() = default;
  /// Validates d_i·b(g_i, g_j) ≡ 0 mod 1, d_i²·q(g_i) ≡ 0 mod 2 and
  /// q(g_i) ≡ b(g_i, g_i) mod 1.
  FiniteQuadraticForm(std::vector<Int> orders, const std::vector<Rational>& q_generators,
                      const std::vector<std::vector<Rational>>& b_generators);

  std::size_t num_generators() const { return orders_.size(); }
  const std::vector<Int>& orders() const { return orders_; }
  /// |A|; throws OverflowError if it does not fit.
  Int group_order() const;
  /// Least common multiple of the orders.
  Int exponent() const;

  Rational q_generator(std::size_t i) const;
  Rational b_generator(std::size_t i, std::size_t j) const;

  Rational q(std::span<const Int> x) const;
  Rational b(std::span<const Int> x, std::span<const Int> y) const;
  Int element_order(std::span<const Int> x) const;

  /// Numerator of q(x) in [0, 2·denominator()).
  Int q_numerator(std::span<const Int> x) const;
  /// Numerator of b(x, y) in [0, denominator()).
  Int b_numerator(std::span<const Int> x, std::span<const Int> y) const;
  Int denominator() const { return den_; }

  /// Coordinates reduced into [0, d_i).
  Coords normalize(std::span<const Int> x) const;
  Coords zero() const { return Coords(orders_.size(), 0); }
  Coords add(std::span<const Int> x, std::span<const Int> y) const;
  Coords scale(std::span<const Int> x, Int k) const;
  Coords unit(std::size_t i) const;

  /// Mixed-radix index in [0, |A|) and back.
  Int index_of(std::span<const Int> x) const;
  Coords element_at(Int index) const;

  /// Visits every element once, in index order, passing its coordinates and
  /// q-numerator. Values are updated incrementally. Throws CapExceededError if
  /// |A| > cap.
  void for_each_element(const std::function<void(const Coords&, Int q_num)>& visit,
                        Int cap) const;

  /// Number of elements x with b(x, ·) ≡ 0 (1 for a nondegenerate form).
  Int radical_size(Int cap) const;
  bool is_nondegenerate(Int cap) const { return radical_size(cap) == 1; }

  /// The p-primary component with generators m_i·g_i, where d_i = p^k·m_i.
  FiniteQuadraticForm p_part(Int p) const;
  /// (A, -q)
  FiniteQuadraticForm negated() const;
  /// Orthogonal sum.
  FiniteQuadraticForm direct_sum(const FiniteQuadraticForm& other) const;

  /// Elementary divisors as sorted prime powers; equal iff the groups are isomorphic.
  std::vector<Int> prime_power_invariants() const;

  friend bool operator==(const FiniteQuadraticForm&, const FiniteQuadraticForm&) = default;

 private:
  // Incremental enumeration: visit(coords, q_num, bx) with bx[j] = b(x, g_j)
  // numerators. Defined in fqf.cpp.
  template <class Visit>
  void walk(Int cap, Visit&& visit) const;

  std::vector<Int> orders_;
  Int den_ = 1;
  std::vector<Int> q_num_;  // mod 2·den
  std::vector<Int> b_num_;  // row-major, mod den
};

inline constexpr Int kIsometrySearchCap = 1'000'000;
inline constexpr Int kAutomorphismCap = 10'000;
inline constexpr std::size_t kMaxAutomorphisms = 200'000;
inline constexpr Int kGaussSumCap = 1'000'000;

/// A homomorphism ⊕ Z/d_i → ⊕ Z/e_j stored as the coordinates of the images of
/// the generators (column i = image of g_i). Automorphisms have equal source
/// and target orders; isometries between two presentations need not.
class GroupAutomorphism {
 public:
  GroupAutomorphism() = default;
  GroupAutomorphism(std::vector<Int> orders, IntMatrix images);
  GroupAutomorphism(std::vector<Int> source_orders, std::vector<Int> target_orders, IntMatrix images);

  static GroupAutomorphism identity(const std::vector<Int>& orders);
  /// x ↦ k·x
  static GroupAutomorphism scalar(const std::vector<Int>& orders, Int k);

  /// Target orders (equal to the source orders for automorphisms).
  const std::vector<Int>& orders() const { return orders_; }
  const std::vector<Int>& source_orders() const { return source_orders_; }
  const IntMatrix& images() const { return images_; }
  Coords apply(std::span<const Int> x) const;
  bool is_identity() const;

  /// (this ∘ other)(x) = this(other(x))
  GroupAutomorphism operator*(const GroupAutomorphism& other) const;

  friend bool operator==(const GroupAutomorphism& a, const GroupAutomorphism& b) {
    return a.images_ == b.images_;
  }
  friend auto operator<=>(const GroupAutomorphism& a, const GroupAutomorphism& b) {
    return a.images_ <=> b.images_;
  }

 private:
  std::vector<Int> source_orders_;
  std::vector<Int> orders_;
  IntMatrix images_;
};

/// Whether `a` maps q to itself (checks q on generators and b on pairs).
bool preserves_form(const FiniteQuadraticForm& form, const GroupAutomorphism& a);

/// A finite group of automorphisms, sorted canonically.
struct FqfAutomorphismGroup {
  std::vector<Int> orders;
  std::vector<GroupAutomorphism> elements;

  std::size_t order() const { return elements.size(); }
  bool contains(const GroupAutomorphism& a) const;
};

/// Smallest subgroup containing the generators (and the identity).
FqfAutomorphismGroup generate_group(const std::vector<Int>& orders,
                                    const std::vector<GroupAutomorphism>& generators,
                                    std::size_t cap = kMaxAutomorphisms);

/// u(2) = ((Z/2)², q = (0, 0), b₁₂ = 1/2); v(2) = ((Z/2)², q = (1, 1), b₁₂ = 1/2).
FiniteQuadraticForm fqf_standard(std::string_view name);

/// σ mod 8 with Σ exp(πi·q(x)) = √|A|·exp(2πiσ/8). Requires a nondegenerate
/// form with |A| ≤ cap.
int gauss_milgram_signature(const FiniteQuadraticForm& form, Int cap = kGaussSumCap);

/// Images of the generators of `from` in `to` defining an isometry, if any.
/// The search runs prime by prime. Throws CapExceededError when a p-part has
/// more than `cap` elements or the search budget runs out; that is
/// "inconclusive", never a silent negative.
std::optional<GroupAutomorphism> find_fqf_isometry(const FiniteQuadraticForm& from,
                                                   const FiniteQuadraticForm& to,
                                                   Int cap = kIsometrySearchCap);
bool fqf_isometric(const FiniteQuadraticForm& a, const FiniteQuadraticForm& b,
                   Int cap = kIsometrySearchCap);

/// O(q): all q-preserving automorphisms. Hard failure (CapExceededError) when
/// |A| > cap or the group has more than max_elements elements.
FqfAutomorphismGroup fqf_automorphisms(const FiniteQuadraticForm& form, Int cap = kAutomorphismCap,
                                       std::size_t max_elements = kMaxAutomorphisms);

struct ComponentWitness {
  std::string kind;  // "u2" or "v2"
  Coords x;          // coordinates in the 2-part's generators
  Coords y;
  Int complement_order = 0;
};

/// Searches pairs of order-2 elements x, y of the 2-part with b(x, y) = 1/2 and
/// (q(x), q(y)) ∈ {(0, 0), (1, 1)} whose span splits off orthogonally. The
/// search runs over the 2-torsion subgroup, which must have at most
/// 2^max_torsion_rank elements.
std::optional<ComponentWitness> has_u2_or_v2_component(const FiniteQuadraticForm& form,
                                                       std::size_t max_torsion_rank = 12);

/// Elements of order exactly d.
Int order_d_element_count(const FiniteQuadraticForm& form, Int d);
/// Elements with d·x = 0.
Int order_dividing_count(const FiniteQuadraticForm& form, Int d);

}  // namespace fmlat
