#include "fmlat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "fmlat/errors.hpp"
#include "fmlat/smith.hpp"

namespace fmlat {

namespace {

// E8 Cartan matrix, Bourbaki numbering: chain 1-3-4-5-6-7-8 with 2 attached
// to 4.
const IntMatrix& e8_cartan() {
  static const IntMatrix m = [] {
    IntMatrix c(8, 8);
    for (std::size_t i = 0; i < 8; ++i) c(i, i) = 2;
    const std::pair<std::size_t, std::size_t> edges[] = {{0, 2}, {2, 3}, {3, 4}, {4, 5},
                                                         {5, 6}, {6, 7}, {1, 3}};
    for (auto [i, j] : edges) c(i, j) = c(j, i) = -1;
    return c;
  }();
  return m;
}

void check_entry_bound(const IntMatrix& gram) {
  if (gram.max_abs() > kEntryBound)
    throw OverflowError("Gram entry exceeds the safety bound " + std::to_string(kEntryBound));
}

std::string scale_suffix(Int k) { return k == 1 ? "" : "(" + std::to_string(k) + ")"; }

std::vector<std::string> block_labels(const LatticeBlock& block) {
  std::vector<std::string> out;
  const std::string prefix = block.label() + ".";
  switch (block.kind) {
    case LatticeBlock::Kind::hyperbolic:
      out = {prefix + "e", prefix + "f"};
      break;
    case LatticeBlock::Kind::e8:
      for (int i = 1; i <= 8; ++i) out.push_back(prefix + "a" + std::to_string(i));
      break;
    case LatticeBlock::Kind::rank_one:
      out = {prefix + "g"};
      break;
    case LatticeBlock::Kind::custom:
      for (std::size_t i = 0; i < block.size; ++i) out.push_back("x" + std::to_string(i));
      break;
  }
  return out;
}

}  // namespace

std::string LatticeBlock::label() const {
  switch (kind) {
    case Kind::hyperbolic:
      return "U" + scale_suffix(scale);
    case Kind::e8:
      return "E8" + scale_suffix(scale);
    case Kind::rank_one:
      return "<" + std::to_string(scale) + ">";
    case Kind::custom:
      break;
  }
  return "custom";
}

Signature symmetric_signature(const IntMatrix& gram) {
  if (!gram.is_symmetric()) throw PreconditionError("Gram matrix must be symmetric");
  const std::size_t n = gram.rows();
  std::vector<Rational> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = Rational(gram(i, j));
  auto at = [&](std::size_t i, std::size_t j) -> Rational& { return a[i * n + j]; };

  Signature sig;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = n;
    for (std::size_t i = k; i < n; ++i) {
      if (at(i, i).sign() != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot == n) {
      // Zero diagonal: x_i += x_j turns an off-diagonal entry into a diagonal one.
      std::size_t pi = n, pj = n;
      for (std::size_t i = k; i < n && pi == n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (at(i, j).sign() != 0) {
            pi = i;
            pj = j;
            break;
          }
      if (pi == n) {
        sig.zero += n - k;
        break;
      }
      for (std::size_t c = k; c < n; ++c) at(pi, c) += at(pj, c);
      for (std::size_t r = k; r < n; ++r) at(r, pi) += at(r, pj);
      pivot = pi;
    }
    if (pivot != k) {
      for (std::size_t c = k; c < n; ++c) std::swap(at(pivot, c), at(k, c));
      for (std::size_t r = k; r < n; ++r) std::swap(at(r, pivot), at(r, k));
    }
    const Rational p = at(k, k);
    (p.sign() > 0 ? sig.positive : sig.negative) += 1;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (at(i, k).sign() == 0) continue;
      const Rational factor = at(i, k) / p;
      for (std::size_t j = k; j < n; ++j) at(i, j) -= factor * at(k, j);
      for (std::size_t j = k; j < n; ++j) at(j, i) = at(i, j);
    }
  }
  return sig;
}

Lattice::Lattice(IntMatrix gram, std::vector<std::string> labels, std::vector<LatticeBlock> blocks,
                 bool degenerate_ok)
    : gram_(std::move(gram)), labels_(std::move(labels)), blocks_(std::move(blocks)) {
  if (gram_.rows() == 0) throw PreconditionError("lattice must have rank >= 1");
  if (!gram_.is_symmetric()) throw PreconditionError("Gram matrix must be square and symmetric");
  check_entry_bound(gram_);
  det_ = determinant(gram_);
  if (det_ == 0 && !degenerate_ok) throw PreconditionError("degenerate Gram matrix (det = 0)");
  signature_ = symmetric_signature(gram_);
  if (blocks_.empty()) blocks_.push_back({LatticeBlock::Kind::custom, 1, 0, gram_.rows()});
  if (labels_.empty()) {
    for (const auto& b : blocks_) {
      auto l = block_labels(b);
      labels_.insert(labels_.end(), l.begin(), l.end());
    }
  }
  if (labels_.size() != gram_.rows()) throw PreconditionError("label count must equal the rank");
}

Lattice::Lattice(IntMatrix gram, std::vector<std::string> labels)
    : Lattice(std::move(gram), std::move(labels), {}, false) {}

Lattice::Lattice(IntMatrix gram, std::vector<std::string> labels, allow_degenerate_t)
    : Lattice(std::move(gram), std::move(labels), {}, true) {}

Lattice Lattice::hyperbolic(Int scale) {
  if (scale == 0) throw PreconditionError("U(k) requires a nonzero scale");
  IntMatrix g{{0, scale}, {scale, 0}};
  return Lattice(std::move(g), {}, {{LatticeBlock::Kind::hyperbolic, scale, 0, 2}}, false);
}

Lattice Lattice::e8(Int scale) {
  if (scale == 0) throw PreconditionError("E8(k) requires a nonzero scale");
  IntMatrix g = e8_cartan();
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) g(i, j) = checked_mul(g(i, j), scale);
  return Lattice(std::move(g), {}, {{LatticeBlock::Kind::e8, scale, 0, 8}}, false);
}

Lattice Lattice::rank_one(Int m) {
  if (m == 0) throw PreconditionError("<m> requires m != 0");
  return Lattice(IntMatrix{{m}}, {}, {{LatticeBlock::Kind::rank_one, m, 0, 1}}, false);
}

Lattice Lattice::k3() {
  Lattice l = direct_sum(e8(-1), e8(-1));
  for (int i = 0; i < 3; ++i) l = direct_sum(l, hyperbolic());
  return l;
}

bool Lattice::is_even() const {
  for (std::size_t i = 0; i < rank(); ++i)
    if (gram_(i, i) % 2 != 0) return false;
  return true;
}

bool Lattice::is_definite() const {
  return signature_.zero == 0 && (signature_.positive == 0 || signature_.negative == 0);
}

std::string Lattice::expression() const {
  std::string out;
  for (const auto& b : blocks_) {
    if (!out.empty()) out += "+";
    if (b.kind != LatticeBlock::Kind::custom) {
      out += b.label();
      continue;
    }
    out += "[";
    for (std::size_t i = b.offset; i < b.offset + b.size; ++i) {
      out += i == b.offset ? "[" : ",[";
      for (std::size_t j = b.offset; j < b.offset + b.size; ++j)
        out += (j == b.offset ? "" : ",") + std::to_string(gram_(i, j));
      out += "]";
    }
    out += "]";
  }
  return out;
}

Lattice Lattice::scaled(Int k) const {
  if (k == 0) throw PreconditionError("scale factor must be nonzero");
  IntMatrix g = gram_;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = checked_mul(g(i, j), k);
  std::vector<LatticeBlock> blocks = blocks_;
  bool all_custom = true;
  for (auto& b : blocks) {
    if (b.kind != LatticeBlock::Kind::custom) {
      b.scale = checked_mul(b.scale, k);
      all_custom = false;
    }
  }
  if (all_custom) return Lattice(std::move(g), {}, {}, is_degenerate());
  return Lattice(std::move(g), {}, std::move(blocks), is_degenerate());
}

Lattice direct_sum(const Lattice& a, const Lattice& b) {
  std::vector<LatticeBlock> blocks = a.blocks_;
  for (auto blk : b.blocks_) {
    blk.offset += a.rank();
    blocks.push_back(blk);
  }
  std::vector<std::string> labels = a.labels_;
  labels.insert(labels.end(), b.labels_.begin(), b.labels_.end());
  return Lattice(block_diagonal(a.gram_, b.gram_), std::move(labels), std::move(blocks),
                 a.is_degenerate() || b.is_degenerate());
}

BasicInvariants basic_invariants(const Lattice& lattice) {
  return {lattice.rank(), lattice.det(), lattice.signature(), lattice.is_even(),
          lattice.is_degenerate()};
}

// ---------------------------------------------------------------- parser

namespace {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Lattice parse() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty lattice expression", pos_);
    Lattice result = term();
    skip_space();
    while (pos_ < text_.size()) {
      expect('+');
      result = direct_sum(result, term());
      skip_space();
    }
    return result;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size()) {
      throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
    }
    if (text_[pos_] != c) {
      throw ParseError(std::string("expected '") + c + "' but found '" + text_[pos_] + "'", pos_);
    }
    ++pos_;
  }

  Int integer() {
    skip_space();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    const std::size_t digits = pos_;
    __int128 value = 0;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
      value = value * 10 + (text_[pos_] - '0');
      if (value > kEntryBound) {
        throw OverflowError("integer at position " + std::to_string(start) +
                            " exceeds the safety bound " + std::to_string(kEntryBound));
      }
      ++pos_;
    }
    if (pos_ == digits) throw ParseError("expected an integer", pos_);
    return static_cast<Int>(negative ? -value : value);
  }

  Int scale_argument(const char* what, Int fallback) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != '(') return fallback;
    ++pos_;
    const std::size_t at = pos_;
    Int k = integer();
    if (k == 0) throw PreconditionError(std::string(what) + "(0): zero scale at position " +
                                        std::to_string(at));
    expect(')');
    return k;
  }

  Lattice term() {
    skip_space();
    const std::size_t start = pos_;
    if (accept("Lambda")) return Lattice::k3();
    if (accept("E8")) return Lattice::e8(scale_argument("E8", 1));
    if (accept("U")) return Lattice::hyperbolic(scale_argument("U", 1));
    if (accept("<")) {
      const std::size_t at = pos_;
      Int m = integer();
      if (m == 0) throw PreconditionError("<0>: zero entry at position " + std::to_string(at));
      expect('>');
      return Lattice::rank_one(m);
    }
    if (start >= text_.size()) throw ParseError("expected a term but reached end of input", start);
    throw ParseError(std::string("unexpected character '") + text_[start] + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Lattice parse_lattice_expr(std::string_view text) { return ExprParser(text).parse(); }

// ---------------------------------------------------------------- sublattices

SublatticeSpec::SublatticeSpec(Lattice ambient, std::vector<std::vector<Int>> generators)
    : ambient_(std::move(ambient)), generators_(std::move(generators)) {
  if (generators_.empty()) throw PreconditionError("sublattice needs at least one generator");
  bool any_nonzero = false;
  for (const auto& g : generators_) {
    if (g.size() != ambient_.rank())
      throw PreconditionError("generator length " + std::to_string(g.size()) +
                              " differs from ambient rank " + std::to_string(ambient_.rank()));
    for (Int v : g) any_nonzero = any_nonzero || v != 0;
  }
  if (!any_nonzero) throw PreconditionError("generated subgroup has rank 0");
}

IntMatrix SublatticeSpec::generator_matrix() const { return IntMatrix::from_rows(generators_); }

Complement orthogonal_complement(const SublatticeSpec& spec) {
  const Lattice& ambient = spec.ambient();
  if (ambient.is_degenerate()) throw PreconditionError("ambient lattice must be nondegenerate");
  const IntMatrix pairing = spec.generator_matrix() * ambient.gram();
  const SmithDecomposition snf = smith_normal_form(pairing);
  const std::size_t n = ambient.rank();
  const std::size_t r = snf.rank();

  Complement out;
  out.basis = IntMatrix(n, n - r);
  for (std::size_t j = r; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) out.basis(i, j - r) = snf.right.entry(i, j);
  if (n == r) return out;

  IntMatrix gram = congruence(ambient.gram(), out.basis);
  out.lattice.emplace(std::move(gram), std::vector<std::string>{}, allow_degenerate);
  out.degenerate = out.lattice->is_degenerate();
  return out;
}

Primitivity is_primitive_sublattice(const SublatticeSpec& spec) {
  const IntMatrix m = spec.generator_matrix();
  const SmithDecomposition snf = smith_normal_form(m);
  const std::size_t k = m.rows();
  const std::size_t r = snf.rank();
  if (r < k) {
    // A row of `left` beyond the rank is a vanishing combination of generators.
    std::ostringstream dep;
    bool first = true;
    for (std::size_t j = 0; j < k; ++j) {
      Int c = snf.left.entry(r, j);
      if (c == 0) continue;
      if (!first) dep << " + ";
      dep << c << "*g" << j;
      first = false;
    }
    throw PreconditionError("generators are dependent: " + dep.str() + " = 0");
  }
  Primitivity out;
  out.elementary_divisors.assign(snf.diagonal.begin(), snf.diagonal.begin() + static_cast<std::ptrdiff_t>(r));
  out.primitive = std::all_of(out.elementary_divisors.begin(), out.elementary_divisors.end(),
                              [](Int d) { return d == 1; });
  // m = left⁻¹ · D · right⁻¹, so the Q-row-space is spanned by the first r rows
  // of right⁻¹, which are primitive as part of a unimodular matrix.
  if (out.primitive) {
    out.saturation = m;
  } else {
    out.saturation = IntMatrix(r, m.cols());
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) out.saturation(i, j) = snf.right_inverse.entry(i, j);
  }
  return out;
}

// ---------------------------------------------------------------- hyperbolic summand

std::string HyperbolicSearch::summary() const {
  if (pair) return structural ? "found (structural U summand)" : "found by search";
  if (!obstruction.empty()) return "none: " + obstruction;
  return "not found up to height " + std::to_string(height_searched);
}

namespace {

// L = U + M forces rank M = rank L - 2, an indefinite L and A_L = A_M.
std::string hyperbolic_obstruction(const Lattice& lattice) {
  const std::size_t n = lattice.rank();
  if (n < 2) return "rank < 2";
  if (!lattice.is_indefinite()) return "definite";
  const std::vector<Int> d = smith_normal_form(lattice.gram()).diagonal;
  std::set<Int> primes;
  for (Int x : d)
    for (const auto& [p, e] : factorize(x)) primes.insert(p);
  for (Int p : primes) {
    const auto l_p = static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [p](Int x) { return x % p == 0; }));
    if (l_p > n - 2)
      return "A_L has " + std::to_string(l_p) + " cyclic " + std::to_string(p) + "-factors, more than rank - 2";
  }
  return "";
}

std::vector<Int> unit_vector(std::size_t n, std::size_t i, Int value = 1) {
  std::vector<Int> v(n, 0);
  v[i] = value;
  return v;
}

bool splits_off(const Lattice& lattice, const std::vector<Int>& e, const std::vector<Int>& f) {
  Complement c = orthogonal_complement(SublatticeSpec(lattice, {e, f}));
  if (!c.lattice || c.degenerate) return lattice.rank() == 2;
  if (c.lattice->rank() != lattice.rank() - 2) return false;
  // det(L) = det(U) · det(complement) · index²; U has |det| 1.
  Int dc = c.lattice->det();
  Int dl = lattice.det();
  return (dc < 0 ? -dc : dc) == (dl < 0 ? -dl : dl);
}

}  // namespace

HyperbolicSearch has_hyperbolic_summand(const Lattice& lattice, Int height_bound,
                                        std::size_t vector_budget) {
  if (lattice.is_degenerate()) throw PreconditionError("lattice must be nondegenerate");
  HyperbolicSearch out;
  const std::size_t n = lattice.rank();
  for (const auto& b : lattice.blocks()) {
    if (b.kind == LatticeBlock::Kind::hyperbolic && (b.scale == 1 || b.scale == -1)) {
      out.structural = true;
      out.pair = HyperbolicPair{unit_vector(n, b.offset), unit_vector(n, b.offset + 1, b.scale)};
      return out;
    }
  }

  out.obstruction = hyperbolic_obstruction(lattice);
  if (!out.obstruction.empty()) return out;

  const IntMatrix& g = lattice.gram();
  std::vector<std::vector<Int>> isotropic;
  std::vector<std::vector<Int>> images;  // G·v for each isotropic v
  for (Int h = 1; h <= height_bound; ++h) {
    // Shell of the cube [-h, h]^n with max |coordinate| == h.
    const long double cube = std::pow(static_cast<long double>(2 * h + 1), static_cast<long double>(n));
    if (cube > static_cast<long double>(vector_budget)) break;
    std::vector<Int> v(n, -h);
    const std::size_t new_from = isotropic.size();
    for (;;) {
      bool on_shell = false;
      bool nonzero = false;
      for (Int x : v) {
        on_shell = on_shell || x == h || x == -h;
        nonzero = nonzero || x != 0;
      }
      if (on_shell && nonzero && bilinear(g, v, v) == 0) {
        images.push_back(g * std::span<const Int>(v));
        isotropic.push_back(v);
      }
      std::size_t i = 0;
      while (i < n && v[i] == h) v[i++] = -h;
      if (i == n) break;
      ++v[i];
    }
    for (std::size_t a = new_from; a < isotropic.size(); ++a) {
      for (std::size_t b = 0; b < isotropic.size(); ++b) {
        __int128 dot = 0;
        for (std::size_t k = 0; k < n; ++k) dot += static_cast<__int128>(images[a][k]) * isotropic[b][k];
        if (dot == 1 && splits_off(lattice, isotropic[a], isotropic[b])) {
          out.pair = HyperbolicPair{isotropic[a], isotropic[b]};
          out.height_searched = h;
          return out;
        }
      }
    }
    out.height_searched = h;
  }
  return out;
}

}  // namespace fmlat
