#include "fmlat/discriminant.hpp"

#include "fmlat/errors.hpp"
#include "fmlat/smith.hpp"

namespace fmlat {

DiscriminantGroup::DiscriminantGroup(const Lattice& lattice) : gram_(lattice.gram()) {
  if (lattice.is_degenerate()) throw PreconditionError("discriminant group of a degenerate lattice");
  const SmithDecomposition snf = smith_normal_form(gram_);
  const std::size_t n = gram_.rows();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (snf.diagonal[i] > 1) kept.push_back(i);

  reduction_ = IntMatrix(kept.size(), n);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const std::size_t i = kept[r];
    const Int d = snf.diagonal[i];
    orders_.push_back(d);
    for (std::size_t j = 0; j < n; ++j) reduction_(r, j) = snf.left.entry(i, j);
    std::vector<Rational> lift(n);
    for (std::size_t j = 0; j < n; ++j) lift[j] = Rational(snf.right.entry(j, i), d);
    lifts_.push_back(std::move(lift));
  }
}

Int DiscriminantGroup::order() const {
  Int o = 1;
  for (Int d : orders_) o = checked_mul(o, d);
  return o;
}

Coords DiscriminantGroup::coordinates_of(std::span<const Rational> x) const {
  const std::size_t n = gram_.rows();
  if (x.size() != n) throw PreconditionError("dual vector has the wrong length");
  std::vector<Int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rational s;
    for (std::size_t j = 0; j < n; ++j)
      if (gram_(i, j) != 0) s += Rational(gram_(i, j)) * x[j];
    if (!s.is_integer()) throw PreconditionError("vector is not in the dual lattice");
    y[i] = s.num();
  }
  Coords c = reduction_ * std::span<const Int>(y);
  for (std::size_t r = 0; r < c.size(); ++r) c[r] = floor_mod(c[r], orders_[r]);
  return c;
}

std::vector<Rational> DiscriminantGroup::lift(std::span<const Int> coords) const {
  std::vector<Rational> v(gram_.rows());
  for (std::size_t r = 0; r < coords.size(); ++r) {
    if (coords[r] == 0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += lifts_[r][j] * Rational(coords[r]);
  }
  return v;
}

DiscriminantGroup discriminant_group(const Lattice& lattice) { return DiscriminantGroup(lattice); }

namespace {

// (rightᵀ·G·right)_{ij} / (d_i·d_j) for the kept generators, computed on lifts.
std::vector<std::vector<Rational>> raw_pairings(const Lattice& lattice, const DiscriminantGroup& group) {
  const auto& lifts = group.generator_lifts();
  std::vector<std::vector<Rational>> out(lifts.size(), std::vector<Rational>(lifts.size()));
  for (std::size_t i = 0; i < lifts.size(); ++i)
    for (std::size_t j = i; j < lifts.size(); ++j)
      out[i][j] = out[j][i] = bilinear(lattice.gram(), lifts[i], lifts[j]);
  return out;
}

}  // namespace

FiniteQuadraticForm discriminant_form(const Lattice& lattice) {
  if (!lattice.is_even()) throw PreconditionError("q_L requires an even lattice");
  DiscriminantGroup group(lattice);
  auto raw = raw_pairings(lattice, group);
  std::vector<Rational> q(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) q[i] = raw[i][i].mod(2);
  for (auto& row : raw)
    for (auto& v : row) v = v.mod(1);
  return FiniteQuadraticForm(group.cyclic_orders(), q, raw);
}

std::vector<std::vector<Rational>> discriminant_bilinear_form(const Lattice& lattice) {
  DiscriminantGroup group(lattice);
  auto raw = raw_pairings(lattice, group);
  for (auto& row : raw)
    for (auto& v : row) v = v.mod(1);
  return raw;
}

std::size_t p_length(const std::vector<Int>& orders, Int p) {
  std::size_t l = 0;
  for (Int d : orders)
    if (d % p == 0) ++l;
  return l;
}

PAnalysis p_analysis(const Lattice& lattice, Int p) {
  if (!is_prime(p)) throw PreconditionError("p_analysis requires a prime, got " + std::to_string(p));
  DiscriminantGroup group(lattice);
  PAnalysis out;
  out.p = p;
  out.l_p = p_length(group.cyclic_orders(), p);
  out.is_p_elementary = true;
  for (Int d : group.cyclic_orders())
    if (d != p) out.is_p_elementary = false;
  out.a = out.is_p_elementary ? group.cyclic_orders().size() : 0;
  return out;
}

}  // namespace fmlat
