#include "fmlat/isometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "fmlat/discriminant.hpp"
#include "fmlat/errors.hpp"

namespace fmlat {

bool is_isometry(const IntMatrix& gram, const IntMatrix& m) {
  return m.rows() == gram.rows() && m.cols() == gram.cols() && congruence(gram, m) == gram;
}

namespace {

// All v with |v_i| <= bound and vᵀGv = norm, in lexicographic order.
std::vector<std::vector<Int>> box_vectors(const IntMatrix& g, Int norm, Int bound) {
  std::vector<std::vector<Int>> out;
  const std::size_t n = g.rows();
  std::vector<Int> v(n, -bound);
  for (;;) {
    if (bilinear(g, v, v) == norm) out.push_back(v);
    std::size_t i = n;
    while (i-- > 0) {
      if (++v[i] <= bound) break;
      v[i] = -bound;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

// Vectors of a positive definite form with xᵀGx = norm (Fincke–Pohst). The
// floating-point decomposition only prunes; every hit is checked exactly.
std::vector<std::vector<Int>> short_vectors(const IntMatrix& g, Int norm) {
  const std::size_t n = g.rows();
  std::vector<std::vector<long double>> q(n, std::vector<long double>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q[i][j] = static_cast<long double>(g(i, j));
  // In-place LDLᵀ: afterwards Q(x) = Σ q_ii (x_i + Σ_{j>i} q_ij x_j)².
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      q[j][i] = q[i][j];
      q[i][j] /= q[i][i];
    }
    for (std::size_t k = i + 1; k < n; ++k)
      for (std::size_t l = k; l < n; ++l) q[k][l] -= q[k][i] * q[i][l];
  }
  std::vector<std::vector<Int>> out;
  std::vector<Int> x(n, 0);
  const long double eps = 1e-9L;
  auto recurse = [&](auto&& self, std::size_t i, long double remaining) -> void {
    long double centre = 0;
    for (std::size_t j = i + 1; j < n; ++j) centre -= q[i][j] * static_cast<long double>(x[j]);
    const long double radius = std::sqrt(std::max(0.0L, remaining / q[i][i])) + eps;
    const Int lo = static_cast<Int>(std::ceil(centre - radius));
    const Int hi = static_cast<Int>(std::floor(centre + radius));
    for (Int v = lo; v <= hi; ++v) {
      x[i] = v;
      const long double t = static_cast<long double>(v) - centre;
      const long double rest = remaining - q[i][i] * t * t;
      if (rest < -eps * (1 + static_cast<long double>(norm))) continue;
      if (i == 0) {
        if (bilinear(g, x, x) == norm) out.push_back(x);
      } else {
        self(self, i - 1, rest);
      }
    }
    x[i] = 0;
  };
  recurse(recurse, n - 1, static_cast<long double>(norm));
  std::sort(out.begin(), out.end());
  return out;
}

// Backtracking over images of the basis vectors among candidate vectors.
std::vector<IntMatrix> assemble(const IntMatrix& g, const std::vector<std::vector<std::vector<Int>>>& candidates,
                                std::size_t max_elements) {
  constexpr std::size_t kNodeBudget = 20'000'000;
  const std::size_t n = g.rows();
  // G·v for every candidate, so pairings are plain dot products.
  std::vector<std::vector<std::vector<Int>>> paired(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& v : candidates[i]) paired[i].push_back(g * std::span<const Int>(v));

  std::vector<IntMatrix> out;
  std::vector<std::size_t> chosen(n, 0);
  std::size_t nodes = 0;
  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      IntMatrix m(n, n);
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r) m(r, c) = candidates[c][chosen[c]][r];
      if (out.size() >= max_elements)
        throw CapExceededError("more than " + std::to_string(max_elements) + " isometries");
      out.push_back(std::move(m));
      return;
    }
    for (std::size_t k = 0; k < candidates[i].size(); ++k) {
      if (++nodes > kNodeBudget) throw CapExceededError("isometry backtracking budget exhausted");
      const auto& v = candidates[i][k];
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) {
        const auto& w = paired[j][chosen[j]];
        Int dot = 0;
        for (std::size_t r = 0; r < n; ++r) dot = checked_add(dot, checked_mul(v[r], w[r]));
        ok = dot == g(i, j);
      }
      if (!ok) continue;
      chosen[i] = k;
      self(self, i + 1);
    }
  };
  recurse(recurse, 0);
  std::sort(out.begin(), out.end());
  return out;
}

bool closed_under_products(const std::vector<IntMatrix>& elements) {
  std::set<IntMatrix> set(elements.begin(), elements.end());
  for (const auto& a : elements)
    for (const auto& b : elements)
      if (!set.contains(a * b)) return false;
  return true;
}

}  // namespace

IsometrySet lattice_isometries(const Lattice& lattice, Int bound, std::size_t max_elements) {
  const IntMatrix& g = lattice.gram();
  const std::size_t n = lattice.rank();
  IsometrySet out;
  out.gram = g;

  if (n == 1) {
    out.elements = {IntMatrix{{-1}}, IntMatrix{{1}}};
    out.complete = true;
    out.certificate = "rank 1: O(L) = {±1}";
    return out;
  }

  if (lattice.is_definite()) {
    if (n > 8) throw UnsupportedError("definite isometry enumeration supports rank <= 8");
    const IntMatrix pos = lattice.signature().negative > 0 ? lattice.scaled(-1).gram() : g;
    std::vector<std::vector<std::vector<Int>>> candidates(n);
    for (std::size_t i = 0; i < n; ++i) candidates[i] = short_vectors(pos, pos(i, i));
    out.elements = assemble(pos, candidates, max_elements);
    out.complete = true;
    out.certificate = "definite: all vectors of the basis norms enumerated, images assigned by backtracking";
    return out;
  }

  if (n != 2) throw UnsupportedError("isometry groups of indefinite lattices of rank >= 3 are not supported");

  const Int certified_bound = checked_mul(3, g.max_abs());
  out.bound = bound > 0 ? bound : certified_bound;
  const auto first = box_vectors(g, g(0, 0), out.bound);
  const auto second = box_vectors(g, g(1, 1), out.bound);
  out.elements = assemble(g, {first, second}, max_elements);

  const bool square = is_perfect_square(checked_neg(lattice.det()));
  const bool closed = closed_under_products(out.elements);
  out.complete = square && closed && out.bound >= certified_bound;
  if (out.complete) {
    out.certificate = "-det = " + std::to_string(-lattice.det()) +
                      " is a square, so O(L) is finite; entry bound " + std::to_string(out.bound) +
                      " >= 3·max|G|; the " + std::to_string(out.elements.size()) +
                      " solutions are closed under products";
  } else if (!square) {
    out.certificate = "-det is not a square: O(L) may be infinite; listed isometries have entries <= " +
                      std::to_string(out.bound);
  } else {
    out.certificate = "search up to entry bound " + std::to_string(out.bound) +
                      (closed ? " is below 3·max|G|" : " is not closed under products");
  }
  return out;
}

namespace {

GroupAutomorphism action_on(const DiscriminantGroup& group, const IntMatrix& m) {
  const std::size_t k = group.cyclic_orders().size();
  const std::size_t n = m.rows();
  IntMatrix images(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& x = group.generator_lifts()[i];
    std::vector<Rational> y(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        if (m(r, c) != 0) y[r] += Rational(m(r, c)) * x[c];
    const Coords coords = group.coordinates_of(y);
    for (std::size_t j = 0; j < k; ++j) images(j, i) = coords[j];
  }
  return GroupAutomorphism(group.cyclic_orders(), std::move(images));
}

}  // namespace

GroupAutomorphism discriminant_action(const Lattice& lattice, const IntMatrix& isometry) {
  if (!is_isometry(lattice.gram(), isometry)) throw PreconditionError("matrix is not an isometry of L");
  return action_on(DiscriminantGroup(lattice), isometry);
}

InducedAction induced_on_discriminant(const Lattice& lattice, const IsometrySet& isometries) {
  const DiscriminantGroup group(lattice);
  std::map<GroupAutomorphism, IntMatrix> seen;
  InducedAction out;
  for (const auto& m : isometries.elements) {
    if (!is_isometry(lattice.gram(), m)) throw PreconditionError("set contains a non-isometry");
    GroupAutomorphism a = action_on(group, m);
    if (a.is_identity()) ++out.kernel_size;
    seen.emplace(std::move(a), m);
  }
  out.image.orders = group.cyclic_orders();
  for (auto& [a, m] : seen) {
    out.image.elements.push_back(a);
    out.preimages.push_back(m);
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::surjective:
      return "surjective";
    case Verdict::not_surjective:
      return "not_surjective";
    case Verdict::inconclusive:
      break;
  }
  return "inconclusive";
}

SurjectivityReport is_surjective_on_discriminant(const Lattice& lattice, Int bound) {
  SurjectivityReport out;
  const FiniteQuadraticForm form = discriminant_form(lattice);
  FqfAutomorphismGroup target;
  IsometrySet isometries;
  try {
    target = fqf_automorphisms(form);
    isometries = lattice_isometries(lattice, bound);
  } catch (const CapExceededError& e) {
    out.reason = e.what();
    return out;
  } catch (const UnsupportedError& e) {
    out.reason = e.what();
    return out;
  }
  out.target_order = target.order();
  out.isometries_complete = isometries.complete;

  // Closure of the image, carrying one preimage per element.
  const InducedAction induced = induced_on_discriminant(lattice, isometries);
  std::map<GroupAutomorphism, IntMatrix> reached;
  reached.emplace(GroupAutomorphism::identity(form.orders()), IntMatrix::identity(lattice.rank()));
  std::vector<GroupAutomorphism> frontier{GroupAutomorphism::identity(form.orders())};
  try {
    while (!frontier.empty()) {
      std::vector<GroupAutomorphism> next;
      for (const auto& a : frontier) {
        for (std::size_t g = 0; g < induced.image.elements.size(); ++g) {
          GroupAutomorphism b = induced.image.elements[g] * a;
          if (reached.contains(b)) continue;
          reached.emplace(b, induced.preimages[g] * reached.at(a));
          next.push_back(std::move(b));
        }
      }
      frontier = std::move(next);
    }
  } catch (const OverflowError& e) {
    out.reason = std::string("preimage products overflowed: ") + e.what();
    return out;
  }
  out.image_order = reached.size();

  if (out.image_order == out.target_order) {
    out.verdict = Verdict::surjective;
    for (auto& [a, m] : reached) out.preimages.emplace_back(a, m);
    out.reason = "image of O(L) has order " + std::to_string(out.image_order) + " = |O(q_L)|";
  } else if (isometries.complete) {
    out.verdict = Verdict::not_surjective;
    out.reason = "O(L) is complete and its image has order " + std::to_string(out.image_order) + " < |O(q_L)| = " +
                 std::to_string(out.target_order);
  } else {
    out.reason = "image of the isometries found has order " + std::to_string(out.image_order) +
                 " < |O(q_L)| = " + std::to_string(out.target_order) + ", but O(L) is not certified complete";
  }
  return out;
}

std::optional<IntMatrix> binary_equivalence(const IntMatrix& g1, const IntMatrix& g2, Int bound) {
  if (g1.rows() != 2 || g2.rows() != 2 || !g1.is_symmetric() || !g2.is_symmetric())
    throw PreconditionError("binary_equivalence expects symmetric 2x2 Gram matrices");
  if (determinant(g1) == 0 || determinant(g2) == 0) throw PreconditionError("Gram matrices must be nondegenerate");
  if (determinant(g1) != determinant(g2)) return std::nullopt;
  const auto first = box_vectors(g1, g2(0, 0), bound);
  const auto second = box_vectors(g1, g2(1, 1), bound);
  for (const auto& p : first)
    for (const auto& q : second) {
      if (bilinear(g1, p, q) != g2(0, 1)) continue;
      const Int det = p[0] * q[1] - p[1] * q[0];
      if (det != 1 && det != -1) continue;
      return IntMatrix{{p[0], q[0]}, {p[1], q[1]}};
    }
  return std::nullopt;
}

namespace {

auto representative_key(const IntMatrix& g) {
  Int negatives = 0;
  for (Int v : g.data()) negatives += v < 0;
  return std::tuple(g.max_abs(), negatives, g.data());
}

}  // namespace

BinaryGenusScan binary_genus_scan(Int det, Int coeff_bound, Int transform_bound) {
  if (det == 0) throw PreconditionError("binary_genus_scan requires det != 0");
  if (coeff_bound < 0 || transform_bound < 1) throw PreconditionError("bounds must be positive");
  BinaryGenusScan scan;
  scan.det = det;
  scan.coeff_bound = coeff_bound;
  scan.transform_bound = transform_bound;

  std::vector<IntMatrix> anchors;
  for (Int a = -coeff_bound; a <= coeff_bound; ++a)
    for (Int b = -2 * coeff_bound; b <= 2 * coeff_bound; ++b)
      for (Int c = -coeff_bound; c <= coeff_bound; ++c) {
        if (4 * a * c - b * b != det) continue;
        const IntMatrix g{{2 * a, b}, {b, 2 * c}};
        ++scan.candidates;
        std::size_t k = 0;
        for (; k < anchors.size(); ++k)
          if (binary_equivalence(anchors[k], g, transform_bound)) break;
        if (k == anchors.size()) {
          anchors.push_back(g);
          scan.classes.push_back({});
        }
        scan.classes[k].members.push_back(g);
      }

  for (auto& cls : scan.classes) {
    cls.representative = *std::min_element(cls.members.begin(), cls.members.end(), [](const auto& x, const auto& y) {
      return representative_key(x) < representative_key(y);
    });
    const Lattice l(cls.representative);
    cls.signature = l.signature();
    cls.form = discriminant_form(l);
    cls.gauss_milgram = gauss_milgram_signature(cls.form);
  }
  std::sort(scan.classes.begin(), scan.classes.end(), [](const auto& x, const auto& y) {
    return representative_key(x.representative) < representative_key(y.representative);
  });

  bool flagged = false;
  for (std::size_t i = 0; i < scan.classes.size(); ++i)
    for (std::size_t j = 0; j < scan.classes.size(); ++j) {
      if (i == j || scan.classes[i].signature != scan.classes[j].signature) continue;
      if (fqf_isometric(scan.classes[i].form, scan.classes[j].form)) {
        scan.classes[i].same_genus_as.push_back(j);
        flagged = true;
      }
    }
  scan.caveat = "classes are separated by transform search up to entry bound " + std::to_string(transform_bound) +
                "; the list covers Gram matrices with |a|, |c| <= " + std::to_string(coeff_bound);
  if (flagged) scan.caveat += "; some classes share a genus and are possibly equal (increase the transform bound)";
  return scan;
}

}  // namespace fmlat
