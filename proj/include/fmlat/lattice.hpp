#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmlat/arith.hpp"

namespace fmlat {

/// Largest absolute Gram entry accepted from user input.
inline constexpr Int kEntryBound = (Int{1} << 31) - 1;

struct Signature {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t zero = 0;  // nullity; nonzero only for degenerate forms

  /// positive - negative
  Int index() const { return static_cast<Int>(positive) - static_cast<Int>(negative); }
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// One summand of a lattice built from the named constructors.
struct LatticeBlock {
  enum class Kind { hyperbolic, e8, rank_one, custom };

  Kind kind = Kind::custom;
  Int scale = 1;  // U(k), E8(k): k; <m>: m
  std::size_t offset = 0;
  std::size_t size = 0;

  std::string label() const;
  friend bool operator==(const LatticeBlock&, const LatticeBlock&) = default;
};

struct allow_degenerate_t {
  explicit allow_degenerate_t() = default;
};
inline constexpr allow_degenerate_t allow_degenerate{};

/// An integral symmetric bilinear form on Z^n, given by its Gram matrix.
///
/// Determinant and signature are computed once on construction. Lattices are
/// nondegenerate unless built with `allow_degenerate` (orthogonal complements
/// may be degenerate, e.g. the span of an isotropic vector).
class Lattice {
 public:
  explicit Lattice(IntMatrix gram, std::vector<std::string> labels = {});
  Lattice(IntMatrix gram, std::vector<std::string> labels, allow_degenerate_t);

  /// U(k) = [[0,k],[k,0]]
  static Lattice hyperbolic(Int scale = 1);
  /// E8(k), k times the Cartan matrix of the E8 root system.
  static Lattice e8(Int scale = 1);
  /// <m> = [[m]]
  static Lattice rank_one(Int m);
  /// The K3 lattice E8(-1)+E8(-1)+U+U+U.
  static Lattice k3();

  const IntMatrix& gram() const { return gram_; }
  std::size_t rank() const { return gram_.rows(); }
  Int det() const { return det_; }
  const Signature& signature() const { return signature_; }
  bool is_even() const;
  bool is_degenerate() const { return det_ == 0; }
  bool is_definite() const;
  bool is_indefinite() const { return signature_.positive > 0 && signature_.negative > 0; }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<LatticeBlock>& blocks() const { return blocks_; }

  /// Constructor expression such as "U(2)+E8(-2)+<-4>"; summands without known
  /// structure appear as their Gram rows, e.g. "[[0,3],[3,2]]".
  std::string expression() const;

  /// L(k): the same group with the form multiplied by k.
  Lattice scaled(Int k) const;

  friend Lattice direct_sum(const Lattice& a, const Lattice& b);
  friend bool operator==(const Lattice& a, const Lattice& b) { return a.gram_ == b.gram_; }

 private:
  Lattice(IntMatrix gram, std::vector<std::string> labels, std::vector<LatticeBlock> blocks,
          bool degenerate_ok);

  IntMatrix gram_;
  std::vector<std::string> labels_;
  std::vector<LatticeBlock> blocks_;
  Int det_ = 0;
  Signature signature_;
};

Lattice direct_sum(const Lattice& a, const Lattice& b);

/// Exact signature by rational symmetric diagonalisation (counts of positive,
/// negative and zero pivots).
Signature symmetric_signature(const IntMatrix& gram);

struct BasicInvariants {
  std::size_t rank = 0;
  Int det = 0;
  Signature signature;
  bool even = false;
  bool degenerate = false;
};

BasicInvariants basic_invariants(const Lattice& lattice);

/// Parses `Expr := Term ("+" Term)*` with
/// `Term := "U" ["(" int ")"] | "E8" ["(" int ")"] | "<" int ">" | "Lambda"`.
/// Whitespace between tokens is ignored. Throws ParseError with the offending
/// position, PreconditionError for zero scales and OverflowError for entries
/// beyond kEntryBound.
Lattice parse_lattice_expr(std::string_view text);

/// Generators in ambient coordinates.
class SublatticeSpec {
 public:
  SublatticeSpec(Lattice ambient, std::vector<std::vector<Int>> generators);

  const Lattice& ambient() const { return ambient_; }
  const std::vector<std::vector<Int>>& generators() const { return generators_; }
  /// generators as rows
  IntMatrix generator_matrix() const;

 private:
  Lattice ambient_;
  std::vector<std::vector<Int>> generators_;
};

struct Complement {
  /// Empty when the complement has rank 0.
  std::optional<Lattice> lattice;
  /// Ambient coordinates of the complement basis, one column per basis vector.
  IntMatrix basis;
  bool degenerate = false;
};

/// {l : b(m, l) = 0 for all generators m}, computed as the integer kernel of the
/// pairing matrix. The basis returned is always primitive in the ambient.
Complement orthogonal_complement(const SublatticeSpec& spec);

struct Primitivity {
  bool primitive = false;
  /// Basis of the saturation (Q-span ∩ ambient), one row per vector. Equals a
  /// basis of the input span when `primitive` is true.
  IntMatrix saturation;
  std::vector<Int> elementary_divisors;
};

/// Throws PreconditionError naming a linear dependency among the generators.
Primitivity is_primitive_sublattice(const SublatticeSpec& spec);

struct HyperbolicPair {
  std::vector<Int> e;
  std::vector<Int> f;
};

struct HyperbolicSearch {
  std::optional<HyperbolicPair> pair;
  bool structural = false;
  /// Set when rank, signature or A_L rule out a U summand; no search is run.
  std::string obstruction;
  /// Coordinate height actually covered by the search. May be smaller than the
  /// requested bound when the vector budget forces it.
  Int height_searched = 0;

  std::string summary() const;
};

inline constexpr Int kDefaultHyperbolicHeight = 10;

/// Structural detection first (a U summand among the lattice's blocks), then a
/// bounded search for e, f with e² = f² = 0, e·f = 1 that split off as an
/// orthogonal summand. A miss means "not found up to height_searched".
HyperbolicSearch has_hyperbolic_summand(const Lattice& lattice,
                                        Int height_bound = kDefaultHyperbolicHeight,
                                        std::size_t vector_budget = 2'000'000);

}  // namespace fmlat
