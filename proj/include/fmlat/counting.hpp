#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fmlat/arith.hpp"
#include "fmlat/errors.hpp"
#include "fmlat/fqf.hpp"
#include "fmlat/lattice.hpp"

namespace fmlat {

struct Citation {
  std::string statement;
  std::string paper_location;
};

struct OddPrimeCondition {
  Int p = 0;
  std::size_t rank = 0;
  std::size_t l_p = 0;
  bool holds = false;  // rank >= l_p + 2
};

struct TwoPartCondition {
  std::size_t l_2 = 0;
  /// False when rank > l_2; the condition then holds vacuously.
  bool applicable = false;
  bool holds = false;
  std::optional<ComponentWitness> witness;
};

/// Nikulin's criterion for an even indefinite lattice T:
///  (a) rank T >= l(A_{T_p}) + 2 for every odd prime p;
///  (b) if rank T = l(A_{T_2}), q_{T_2} splits off u(2) or v(2).
/// When both hold, the genus of T has one class and O(T) -> O(q_T) is onto.
struct NikulinReport {
  Lattice lattice;
  std::vector<OddPrimeCondition> condition_a;
  TwoPartCondition condition_b;
  bool conclusion = false;  // genus unique and surjective; only when (a) and (b) hold
  Citation citation;

  bool condition_a_holds() const {
    return std::all_of(condition_a.begin(), condition_a.end(), [](const auto& c) { return c.holds; });
  }
  bool genus_unique() const { return conclusion; }
  bool surjective() const { return conclusion; }
};

/// Throws PreconditionError for odd, definite or degenerate input and
/// CapExceededError when condition (b) needs a 2-torsion search beyond the cap.
NikulinReport nikulin_check(const Lattice& t);

struct DoubleCosets {
  std::size_t count = 0;
  std::vector<std::size_t> sizes;  // one per double coset, in discovery order
};

/// H\G/K by orbit sweeping: G, H, K are lists of elements of a finite group
/// (T needs *, == and <). Throws PreconditionError when H or K is not a subset
/// of G closed under products, when G has repeated elements or when G is not
/// closed under multiplication by H and K.
template <class T>
DoubleCosets double_cosets(const std::vector<T>& ambient, const std::vector<T>& left,
                           const std::vector<T>& right) {
  if (ambient.empty()) throw PreconditionError("ambient group is empty");
  std::vector<T> g = ambient;
  std::sort(g.begin(), g.end());
  if (std::adjacent_find(g.begin(), g.end()) != g.end())
    throw PreconditionError("ambient list has repeated elements");
  auto index_of = [&](const T& x) -> std::optional<std::size_t> {
    auto it = std::lower_bound(g.begin(), g.end(), x);
    if (it == g.end() || !(*it == x)) return std::nullopt;
    return static_cast<std::size_t>(it - g.begin());
  };
  auto check_subgroup = [&](const std::vector<T>& h, const char* name) {
    if (h.empty()) throw PreconditionError(std::string(name) + " subgroup is empty");
    std::vector<T> sorted = h;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& a : h) {
      if (!index_of(a)) throw PreconditionError(std::string(name) + " subgroup is not contained in the ambient group");
      for (const auto& b : h)
        if (!std::binary_search(sorted.begin(), sorted.end(), a * b))
          throw PreconditionError(std::string(name) + " subset is not closed under products");
    }
  };
  check_subgroup(left, "left");
  check_subgroup(right, "right");

  DoubleCosets out;
  std::vector<bool> seen(g.size(), false);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (seen[i]) continue;
    std::size_t size = 0;
    for (const auto& h : left)
      for (const auto& k : right) {
        auto j = index_of(h * g[i] * k);
        if (!j) throw PreconditionError("ambient group is not closed under products");
        if (!seen[*j]) {
          seen[*j] = true;
          ++size;
        }
      }
    out.sizes.push_back(size);
    covered += size;
  }
  out.count = out.sizes.size();
  if (covered != g.size()) throw PreconditionError("double cosets do not partition the ambient group");
  return out;
}

/// |left \ ambient / right| for groups of automorphisms of one presentation.
std::size_t double_coset_count(const FqfAutomorphismGroup& ambient, const FqfAutomorphismGroup& left,
                               const FqfAutomorphismGroup& right);

/// The image of G_Hodge in O(A). The period itself is not modelled.
struct GHodgeSpec {
  enum class Mode { trivial, plus_minus, cyclic, explicit_generators };

  Mode mode = Mode::plus_minus;
  Int cyclic_order = 0;  // m for Mode::cyclic
  /// Automorphisms of A_T in the generator coordinates of discriminant_form(T).
  std::vector<GroupAutomorphism> generators;

  static GHodgeSpec trivial() { return {Mode::trivial, 0, {}}; }
  static GHodgeSpec plus_minus() { return {Mode::plus_minus, 0, {}}; }
  static GHodgeSpec cyclic(Int m);
  static GHodgeSpec explicit_generators(std::vector<GroupAutomorphism> gens);
  /// "trivial", "plus_minus" / "pm", "cyclic(m)" / "cyclic:m".
  static GHodgeSpec parse(const std::string& text);

  std::string describe() const;
};

/// How one genus representative was counted.
struct RepresentativeCount {
  Lattice lattice;
  Int count = 0;
  std::string method;  // "nikulin", "hyperbolic", "surjective", "double-cosets"
  std::size_t ambient_order = 0;
  std::size_t left_order = 0;
  std::size_t right_order = 0;
};

struct FmCountReport {
  std::string surface;  // "k3" or "abelian"
  Lattice ns;
  Lattice transcendental;
  std::string ghodge;
  std::string genus_certificate;
  std::string shortcut;  // empty when double cosets were counted
  std::vector<Lattice> genus_reps;
  std::vector<Int> per_rep_count;
  std::vector<RepresentativeCount> details;
  Int total = 0;
  std::string interpretation;
  std::vector<std::string> certificates;
  std::vector<Citation> citations;
};

/// Σ over the genus of NS of |O(L_i) \ O(A_{L_i}) / G_Hodge|. Genus sources,
/// in order: an explicit list, a hyperbolic summand of NS, Nikulin's criterion
/// on NS, rank one, the binary scan for rank two, the p-elementary rule.
/// Without any of these a PreconditionError asks for the representatives.
FmCountReport fm_count_k3(const Lattice& ns, const Lattice& transcendental,
                          const GHodgeSpec& g = GHodgeSpec::plus_minus(),
                          const std::vector<Lattice>& genus_reps = {});
FmCountReport fm_count_abelian(const Lattice& ns, const Lattice& transcendental,
                               const GHodgeSpec& g = GHodgeSpec::plus_minus(),
                               const std::vector<Lattice>& genus_reps = {});

/// max{m : φ(m) divides r}, scanning m <= 2r² (φ(m) >= √(m/2)).
Int totient_order_bound(Int r);

struct TwistedCheck {
  Int order2_count = 0;
  Int hodge_bound = 0;
  bool partner_exists = false;
  std::string argument;
  std::vector<Citation> citations;
};

/// Elements of order 2 in A_T against the largest possible |O_Hodge(T)|. More
/// such elements than the bound forces two G_Hodge-orbits, i.e. a twisted
/// partner of order 2. A lower-bound argument, not a count.
TwistedCheck twisted_partner_check(const Lattice& transcendental);

/// Number of distinct primes dividing |det|/2; det must be even.
std::size_t half_det_prime_count(Int det);

}  // namespace fmlat
