#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fmlat/arith.hpp"
#include "fmlat/fqf.hpp"
#include "fmlat/lattice.hpp"

namespace fmlat {

/// Integer matrices M (acting on column vectors) with MᵀGM = G.
struct IsometrySet {
  IntMatrix gram;
  std::vector<IntMatrix> elements;  // sorted
  bool complete = false;
  /// Entry bound of the search; 0 when the search was not entry-bounded.
  Int bound = 0;
  std::string certificate;
};

inline constexpr std::size_t kMaxIsometries = 200'000;

/// Rank 1: {±1}. Rank 2 indefinite: entry-bounded search, complete only when
/// -det is a perfect square, the search is closed under products and the bound
/// is at least 3·max|G| (bound <= 0 selects exactly that). Definite of rank <= 8:
/// short-vector enumeration plus backtracking, always complete. Anything else
/// throws UnsupportedError; more than max_elements isometries throws
/// CapExceededError.
IsometrySet lattice_isometries(const Lattice& lattice, Int bound = 0,
                               std::size_t max_elements = kMaxIsometries);

/// True iff MᵀGM = G.
bool is_isometry(const IntMatrix& gram, const IntMatrix& m);

/// The action of M ∈ O(L) on A_L in the generator coordinates of
/// discriminant_group(L).
GroupAutomorphism discriminant_action(const Lattice& lattice, const IntMatrix& isometry);

struct InducedAction {
  /// Distinct images, sorted; a subgroup when the isometry set is a group.
  FqfAutomorphismGroup image;
  /// One isometry mapping to each image element, same order as image.elements.
  std::vector<IntMatrix> preimages;
  /// Number of isometries acting trivially on A_L.
  std::size_t kernel_size = 0;
};

InducedAction induced_on_discriminant(const Lattice& lattice, const IsometrySet& isometries);

enum class Verdict { surjective, not_surjective, inconclusive };
std::string to_string(Verdict v);

struct SurjectivityReport {
  Verdict verdict = Verdict::inconclusive;
  std::size_t target_order = 0;  // |O(q_L)|, 0 if not computed
  std::size_t image_order = 0;   // order of the subgroup generated by the image
  bool isometries_complete = false;
  /// For each element of O(q_L) reached, an isometry (possibly a product of
  /// found ones) that induces it. Filled when surjective.
  std::vector<std::pair<GroupAutomorphism, IntMatrix>> preimages;
  std::string reason;
};

/// Compares the subgroup generated by the image of O(L) with O(q_L). A
/// partial isometry set can still certify surjectivity; it never certifies
/// the opposite.
SurjectivityReport is_surjective_on_discriminant(const Lattice& lattice, Int bound = 0);

/// P with |entries| <= bound, det P = ±1 and PᵀG1P = G2, searched in a fixed
/// order; nullopt means "not found up to bound".
std::optional<IntMatrix> binary_equivalence(const IntMatrix& g1, const IntMatrix& g2, Int bound);

struct BinaryClass {
  IntMatrix representative;
  std::vector<IntMatrix> members;  // enumerated Gram matrices in this class
  Signature signature;
  FiniteQuadraticForm form;
  int gauss_milgram = 0;
  /// Indices of other classes with the same signature and an isometric
  /// discriminant form: possibly equal, increase the transform bound.
  std::vector<std::size_t> same_genus_as;
};

struct BinaryGenusScan {
  Int det = 0;
  Int coeff_bound = 0;
  Int transform_bound = 0;
  std::size_t candidates = 0;
  std::vector<BinaryClass> classes;
  std::string caveat;
};

/// Enumerates even Gram matrices [[2a, b], [b, 2c]] with determinant det,
/// |a|, |c| <= coeff_bound and |b| <= 2·coeff_bound, then clusters them by
/// binary_equivalence at transform_bound.
BinaryGenusScan binary_genus_scan(Int det, Int coeff_bound, Int transform_bound);

}  // namespace fmlat
