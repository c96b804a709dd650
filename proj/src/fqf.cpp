#include "fmlat/fqf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>

#include "fmlat/errors.hpp"

namespace fmlat {

// ---------------------------------------------------------------- FiniteQuadraticForm

FiniteQuadraticForm::FiniteQuadraticForm(std::vector<Int> orders,
                                         const std::vector<Rational>& q_generators,
                                         const std::vector<std::vector<Rational>>& b_generators)
    : orders_(std::move(orders)) {
  const std::size_t k = orders_.size();
  if (q_generators.size() != k || b_generators.size() != k)
    throw PreconditionError("form data does not match the number of generators");
  for (Int d : orders_)
    if (d < 1) throw PreconditionError("cyclic orders must be positive");

  std::vector<Rational> q(k);
  std::vector<Rational> b(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    if (b_generators[i].size() != k) throw PreconditionError("b matrix must be square");
    q[i] = q_generators[i].mod(2);
    for (std::size_t j = 0; j < k; ++j) {
      if (b_generators[i][j].mod(1) != b_generators[j][i].mod(1))
        throw PreconditionError("b must be symmetric");
      b[i * k + j] = b_generators[i][j].mod(1);
    }
  }
  den_ = 1;
  for (const auto& v : q) den_ = lcm(den_, v.den());
  for (const auto& v : b) den_ = lcm(den_, v.den());
  q_num_.resize(k);
  b_num_.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) q_num_[i] = checked_mul(q[i].num(), den_ / q[i].den());
  for (std::size_t i = 0; i < k * k; ++i) b_num_[i] = checked_mul(b[i].num(), den_ / b[i].den());

  const Int two_den = checked_mul(2, den_);
  for (std::size_t i = 0; i < k; ++i) {
    const Int d = orders_[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (mul_mod(d, b_num_[i * k + j], den_) != 0)
        throw PreconditionError("order of generator " + std::to_string(i) +
                                " does not annihilate b(g_i, g_" + std::to_string(j) + ")");
    }
    if (mul_mod(mul_mod(d, d, two_den), q_num_[i], two_den) != 0)
      throw PreconditionError("q(d_i·g_i) must vanish mod 2 for generator " + std::to_string(i));
    if (floor_mod(q_num_[i] - b_num_[i * k + i], den_) != 0)
      throw PreconditionError("q(g_i) and b(g_i, g_i) disagree mod 1 for generator " +
                              std::to_string(i));
  }
}

Int FiniteQuadraticForm::group_order() const {
  Int o = 1;
  for (Int d : orders_) o = checked_mul(o, d);
  return o;
}

Int FiniteQuadraticForm::exponent() const {
  Int e = 1;
  for (Int d : orders_) e = lcm(e, d);
  return e;
}

Rational FiniteQuadraticForm::q_generator(std::size_t i) const { return Rational(q_num_[i], den_); }

Rational FiniteQuadraticForm::b_generator(std::size_t i, std::size_t j) const {
  return Rational(b_num_[i * orders_.size() + j], den_);
}

Int FiniteQuadraticForm::q_numerator(std::span<const Int> x) const {
  const std::size_t k = orders_.size();
  const Int two_den = 2 * den_;
  __int128 s = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i] == 0) continue;
    const Int xi = floor_mod(x[i], orders_[i]);
    s += mul_mod(mul_mod(xi, xi, two_den), q_num_[i], two_den);
    for (std::size_t j = i + 1; j < k; ++j) {
      if (x[j] == 0) continue;
      const Int xj = floor_mod(x[j], orders_[j]);
      s += 2 * static_cast<__int128>(mul_mod(mul_mod(xi, xj, den_), b_num_[i * k + j], den_));
    }
    s %= two_den;
  }
  return static_cast<Int>(s % two_den);
}

Int FiniteQuadraticForm::b_numerator(std::span<const Int> x, std::span<const Int> y) const {
  const std::size_t k = orders_.size();
  __int128 s = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i] == 0) continue;
    const Int xi = floor_mod(x[i], orders_[i]);
    for (std::size_t j = 0; j < k; ++j) {
      if (y[j] == 0) continue;
      s += mul_mod(mul_mod(xi, floor_mod(y[j], orders_[j]), den_), b_num_[i * k + j], den_);
    }
    s %= den_;
  }
  return static_cast<Int>(s % den_);
}

Rational FiniteQuadraticForm::q(std::span<const Int> x) const { return Rational(q_numerator(x), den_); }

Rational FiniteQuadraticForm::b(std::span<const Int> x, std::span<const Int> y) const {
  return Rational(b_numerator(x, y), den_);
}

Int FiniteQuadraticForm::element_order(std::span<const Int> x) const {
  Int o = 1;
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const Int d = orders_[i];
    o = lcm(o, d / gcd(floor_mod(x[i], d), d));
  }
  return o;
}

Coords FiniteQuadraticForm::normalize(std::span<const Int> x) const {
  Coords out(orders_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = floor_mod(x[i], orders_[i]);
  return out;
}

Coords FiniteQuadraticForm::add(std::span<const Int> x, std::span<const Int> y) const {
  Coords out(orders_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = floor_mod(checked_add(x[i], y[i]), orders_[i]);
  return out;
}

Coords FiniteQuadraticForm::scale(std::span<const Int> x, Int k) const {
  Coords out(orders_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mul_mod(floor_mod(x[i], orders_[i]), floor_mod(k, orders_[i]), orders_[i]);
  return out;
}

Coords FiniteQuadraticForm::unit(std::size_t i) const {
  Coords out = zero();
  out[i] = orders_[i] == 1 ? 0 : 1;
  return out;
}

Int FiniteQuadraticForm::index_of(std::span<const Int> x) const {
  Int index = 0;
  for (std::size_t i = orders_.size(); i-- > 0;)
    index = checked_add(checked_mul(index, orders_[i]), floor_mod(x[i], orders_[i]));
  return index;
}

Coords FiniteQuadraticForm::element_at(Int index) const {
  Coords out(orders_.size());
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    out[i] = index % orders_[i];
    index /= orders_[i];
  }
  return out;
}

template <class Visit>
void FiniteQuadraticForm::walk(Int cap, Visit&& visit) const {
  const Int total = group_order();
  if (total > cap)
    throw CapExceededError("group of order " + std::to_string(total) + " exceeds the cap " +
                           std::to_string(cap));
  const std::size_t k = orders_.size();
  const Int two_den = 2 * den_;
  Coords x(k, 0);
  std::vector<Int> bx(k, 0);
  Int q = 0;
  for (Int index = 0;; ++index) {
    visit(x, q, bx);
    // Mixed-radix increment. A digit wrapping from d_i - 1 to 0 is the same
    // group element as adding g_i once more, so each touched digit adds g_i.
    std::size_t i = 0;
    for (; i < k; ++i) {
      q = (q + q_num_[i] + 2 * bx[i]) % two_den;
      for (std::size_t j = 0; j < k; ++j) bx[j] = (bx[j] + b_num_[i * k + j]) % den_;
      if (++x[i] < orders_[i]) break;
      x[i] = 0;
    }
    if (i == k) break;
  }
}

void FiniteQuadraticForm::for_each_element(const std::function<void(const Coords&, Int)>& visit,
                                           Int cap) const {
  walk(cap, [&](const Coords& x, Int q, const std::vector<Int>&) { visit(x, q); });
}

Int FiniteQuadraticForm::radical_size(Int cap) const {
  Int count = 0;
  walk(cap, [&](const Coords&, Int, const std::vector<Int>& bx) {
    if (std::all_of(bx.begin(), bx.end(), [](Int v) { return v == 0; })) ++count;
  });
  return count;
}

FiniteQuadraticForm FiniteQuadraticForm::p_part(Int p) const {
  std::vector<Int> orders;
  std::vector<Int> multipliers;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    Int d = orders_[i];
    if (d % p != 0) continue;
    Int pk = 1;
    while (d % p == 0) {
      d /= p;
      pk *= p;
    }
    orders.push_back(pk);
    multipliers.push_back(d);
    source.push_back(i);
  }
  const std::size_t k = orders.size();
  std::vector<Rational> q(k);
  std::vector<std::vector<Rational>> b(k, std::vector<Rational>(k));
  for (std::size_t a = 0; a < k; ++a) {
    const Int m = multipliers[a];
    q[a] = q_generator(source[a]) * Rational(checked_mul(m, m));
    for (std::size_t c = 0; c < k; ++c)
      b[a][c] = b_generator(source[a], source[c]) * Rational(checked_mul(m, multipliers[c]));
  }
  return FiniteQuadraticForm(std::move(orders), q, b);
}

FiniteQuadraticForm FiniteQuadraticForm::negated() const {
  const std::size_t k = orders_.size();
  std::vector<Rational> q(k);
  std::vector<std::vector<Rational>> b(k, std::vector<Rational>(k));
  for (std::size_t i = 0; i < k; ++i) {
    q[i] = -q_generator(i);
    for (std::size_t j = 0; j < k; ++j) b[i][j] = -b_generator(i, j);
  }
  return FiniteQuadraticForm(orders_, q, b);
}

FiniteQuadraticForm FiniteQuadraticForm::direct_sum(const FiniteQuadraticForm& other) const {
  const std::size_t k1 = orders_.size();
  const std::size_t k = k1 + other.orders_.size();
  std::vector<Int> orders = orders_;
  orders.insert(orders.end(), other.orders_.begin(), other.orders_.end());
  std::vector<Rational> q(k);
  std::vector<std::vector<Rational>> b(k, std::vector<Rational>(k));
  for (std::size_t i = 0; i < k; ++i) {
    q[i] = i < k1 ? q_generator(i) : other.q_generator(i - k1);
    for (std::size_t j = 0; j < k; ++j) {
      if (i < k1 && j < k1) b[i][j] = b_generator(i, j);
      if (i >= k1 && j >= k1) b[i][j] = other.b_generator(i - k1, j - k1);
    }
  }
  return FiniteQuadraticForm(std::move(orders), q, b);
}

std::vector<Int> FiniteQuadraticForm::prime_power_invariants() const {
  std::vector<Int> out;
  for (Int d : orders_) {
    for (auto [p, e] : factorize(d)) {
      Int pe = 1;
      for (int i = 0; i < e; ++i) pe *= p;
      out.push_back(pe);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- automorphisms

GroupAutomorphism::GroupAutomorphism(std::vector<Int> orders, IntMatrix images)
    : GroupAutomorphism(orders, orders, std::move(images)) {}

GroupAutomorphism::GroupAutomorphism(std::vector<Int> source_orders, std::vector<Int> target_orders,
                                     IntMatrix images)
    : source_orders_(std::move(source_orders)), orders_(std::move(target_orders)), images_(std::move(images)) {
  if (images_.rows() != orders_.size() || images_.cols() != source_orders_.size())
    throw PreconditionError("homomorphism matrix must have one column per source generator and one row "
                            "per target generator");
  for (std::size_t j = 0; j < orders_.size(); ++j)
    for (std::size_t i = 0; i < source_orders_.size(); ++i) images_(j, i) = floor_mod(images_(j, i), orders_[j]);
}

GroupAutomorphism GroupAutomorphism::identity(const std::vector<Int>& orders) {
  return scalar(orders, 1);
}

GroupAutomorphism GroupAutomorphism::scalar(const std::vector<Int>& orders, Int k) {
  IntMatrix m(orders.size(), orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) m(i, i) = k;
  return GroupAutomorphism(orders, std::move(m));
}

Coords GroupAutomorphism::apply(std::span<const Int> x) const {
  Coords y(orders_.size(), 0);
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    __int128 s = 0;
    for (std::size_t i = 0; i < source_orders_.size(); ++i) {
      if (x[i] == 0) continue;
      s += mul_mod(floor_mod(x[i], source_orders_[i]), images_(j, i), orders_[j]);
    }
    y[j] = static_cast<Int>(s % orders_[j]);
  }
  return y;
}

bool GroupAutomorphism::is_identity() const {
  return source_orders_ == orders_ && *this == identity(orders_);
}

GroupAutomorphism GroupAutomorphism::operator*(const GroupAutomorphism& other) const {
  if (other.orders_ != source_orders_) throw PreconditionError("cannot compose: groups do not match");
  IntMatrix m(orders_.size(), other.source_orders_.size());
  for (std::size_t i = 0; i < other.source_orders_.size(); ++i) {
    Coords col = apply(other.images_.col(i));
    for (std::size_t j = 0; j < orders_.size(); ++j) m(j, i) = col[j];
  }
  return GroupAutomorphism(other.source_orders_, orders_, std::move(m));
}

bool preserves_form(const FiniteQuadraticForm& form, const GroupAutomorphism& a) {
  const std::size_t k = form.num_generators();
  std::vector<Coords> img(k);
  for (std::size_t i = 0; i < k; ++i) {
    img[i] = a.images().col(i);
    const Coords killed = form.scale(img[i], form.orders()[i]);
    if (std::any_of(killed.begin(), killed.end(), [](Int v) { return v != 0; })) return false;
    if (form.q_numerator(img[i]) != form.q_numerator(form.unit(i))) return false;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (form.b_numerator(img[i], img[j]) != form.b_numerator(form.unit(i), form.unit(j))) return false;
  return true;
}

bool FqfAutomorphismGroup::contains(const GroupAutomorphism& a) const {
  return std::binary_search(elements.begin(), elements.end(), a);
}

FqfAutomorphismGroup generate_group(const std::vector<Int>& orders,
                                    const std::vector<GroupAutomorphism>& generators,
                                    std::size_t cap) {
  std::set<GroupAutomorphism> seen{GroupAutomorphism::identity(orders)};
  std::vector<GroupAutomorphism> frontier(seen.begin(), seen.end());
  while (!frontier.empty()) {
    std::vector<GroupAutomorphism> next;
    for (const auto& x : frontier) {
      for (const auto& g : generators) {
        GroupAutomorphism y = g * x;
        if (seen.insert(y).second) {
          if (seen.size() > cap)
            throw CapExceededError("generated group exceeds " + std::to_string(cap) + " elements");
          next.push_back(std::move(y));
        }
      }
    }
    frontier = std::move(next);
  }
  return {orders, {seen.begin(), seen.end()}};
}

// ---------------------------------------------------------------- standard forms

FiniteQuadraticForm fqf_standard(std::string_view name) {
  const Rational half(1, 2);
  if (name == "u2") return FiniteQuadraticForm({2, 2}, {0, 0}, {{0, half}, {half, 0}});
  if (name == "v2") return FiniteQuadraticForm({2, 2}, {1, 1}, {{0, half}, {half, 0}});
  throw PreconditionError("unknown standard form '" + std::string(name) + "' (expected u2 or v2)");
}

// ---------------------------------------------------------------- Gauss–Milgram

int gauss_milgram_signature(const FiniteQuadraticForm& form, Int cap) {
  if (!form.is_nondegenerate(cap)) throw PreconditionError("Gauss–Milgram requires a nondegenerate bilinear form");
  std::map<Int, Int> histogram;
  form.for_each_element([&](const Coords&, Int q) { ++histogram[q]; }, cap);

  using Complex = std::complex<long double>;
  const long double pi = std::numbers::pi_v<long double>;
  Complex sum = 0;
  for (auto [q, count] : histogram) {
    const long double angle = pi * static_cast<long double>(q) / static_cast<long double>(form.denominator());
    sum += static_cast<long double>(count) * std::polar(1.0L, angle);
  }
  const Complex z = sum / std::sqrt(static_cast<long double>(form.group_order()));
  const long double eighths = std::arg(z) / (pi / 4);
  const int sigma = static_cast<int>(floor_mod(static_cast<Int>(std::llround(eighths)), 8));
  if (std::abs(z - std::polar(1.0L, pi * sigma / 4)) > 1e-9L)
    throw std::logic_error("normalised Gauss sum is not an eighth root of unity");
  return sigma;
}

// ---------------------------------------------------------------- isometry search

namespace {

struct ElementTable {
  std::vector<Coords> coords;
  std::vector<Int> order;
  std::vector<Rational> q;
};

ElementTable tabulate(const FiniteQuadraticForm& form, Int cap) {
  ElementTable t;
  form.for_each_element(
      [&](const Coords& x, Int q) {
        t.coords.push_back(x);
        t.order.push_back(form.element_order(x));
        t.q.emplace_back(q, form.denominator());
      },
      cap);
  return t;
}

// Backtracking over images of the generators of `from` inside `to`.
class IsometrySearch {
 public:
  static constexpr std::size_t kNodeBudget = 50'000'000;

  IsometrySearch(const FiniteQuadraticForm& from, const FiniteQuadraticForm& to, const ElementTable& table)
      : from_(from), to_(to), k_(from.num_generators()) {
    for (std::size_t i = 0; i < table.coords.size(); ++i)
      buckets_[{table.order[i], table.q[i]}].push_back(i);
    table_ = &table;
    for (std::size_t i = 0; i < k_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) target_b_.push_back(from.b_generator(i, j));
    }
    chosen_.resize(k_);
  }

  // Calls `found` for each isometry; stops when it returns false.
  template <class Found>
  void run(Found&& found) {
    bool keep_going = true;
    descend(0, found, keep_going);
  }

 private:
  template <class Found>
  void descend(std::size_t i, Found& found, bool& keep_going) {
    if (i == k_) {
      const std::size_t rows = to_.num_generators();
      IntMatrix m(rows, k_);
      for (std::size_t c = 0; c < k_; ++c)
        for (std::size_t r = 0; r < rows; ++r) m(r, c) = table_->coords[chosen_[c]][r];
      keep_going = found(GroupAutomorphism(from_.orders(), to_.orders(), std::move(m)));
      return;
    }
    auto it = buckets_.find({from_.orders()[i], from_.q_generator(i)});
    if (it == buckets_.end()) return;
    for (std::size_t candidate : it->second) {
      if (++nodes_ > kNodeBudget) throw CapExceededError("isometry search budget exhausted");
      const Coords& h = table_->coords[candidate];
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j)
        ok = to_.b(h, table_->coords[chosen_[j]]) == target_b_[i * k_ + j];
      if (!ok) continue;
      chosen_[i] = candidate;
      descend(i + 1, found, keep_going);
      if (!keep_going) return;
    }
  }

  const FiniteQuadraticForm& from_;
  const FiniteQuadraticForm& to_;
  std::size_t k_;
  const ElementTable* table_ = nullptr;
  std::map<std::pair<Int, Rational>, std::vector<std::size_t>> buckets_;
  std::vector<Rational> target_b_;
  std::vector<std::size_t> chosen_;
  std::size_t nodes_ = 0;
};

}  // namespace

namespace {

// Isometry search for forms on p-groups. The source is split into orthogonal
// blocks (one generator x with b(x, x) of full order, or for p = 2 a pair x, y
// with b(x, y) of full order); images are chosen block by block inside the
// orthogonal complement of the earlier images, and each complement must have
// the same (order, q) histogram as the matching source complement.
class BlockSearch {
 public:
  static constexpr std::size_t kNodeBudget = 200'000;

  BlockSearch(const FiniteQuadraticForm& from, const FiniteQuadraticForm& to, Int cap)
      : from_(from), to_(to), src_(tabulate(from, cap)), dst_(tabulate(to, cap)) {
    decompose();
    for (std::size_t i = 0; i < dst_.coords.size(); ++i) dst_all_.push_back(i);
  }

  /// Images of from's generators in to's coordinates, one column each.
  std::optional<IntMatrix> run() {
    images_.assign(basis_.size(), 0);
    if (!descend(0, dst_all_)) return std::nullopt;
    IntMatrix m(to_.num_generators(), from_.num_generators());
    for (std::size_t g = 0; g < from_.num_generators(); ++g) {
      Coords x = to_.zero();
      for (std::size_t j = 0; j < basis_.size(); ++j)
        x = to_.add(x, to_.scale(dst_.coords[images_[j]], generator_coords_[g][j]));
      for (std::size_t r = 0; r < x.size(); ++r) m(r, g) = x[r];
    }
    return m;
  }

 private:
  using Histogram = std::map<std::pair<Int, Rational>, Int>;

  static Int denominator_of(const Rational& v) { return v.mod(1).den(); }

  Histogram histogram(const ElementTable& t, const std::vector<std::size_t>& subset) const {
    Histogram h;
    for (std::size_t i : subset) ++h[{t.order[i], t.q[i]}];
    return h;
  }

  std::vector<std::size_t> orthogonal(const FiniteQuadraticForm& f, const ElementTable& t,
                                      const std::vector<std::size_t>& subset, std::size_t w) const {
    std::vector<Int> row(f.num_generators());
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = f.b_numerator(t.coords[w], f.unit(j));
    std::vector<std::size_t> out;
    for (std::size_t i : subset) {
      __int128 s = 0;
      for (std::size_t j = 0; j < row.size(); ++j) s += static_cast<__int128>(t.coords[i][j]) * row[j];
      if (s % f.denominator() == 0) out.push_back(i);
    }
    return out;
  }

  void decompose() {
    std::vector<std::size_t> rest(src_.coords.size());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = i;
    while (rest.size() > 1) {
      levels_.push_back(histogram(src_, rest));
      Int top = 1;
      for (std::size_t i : rest) top = std::max(top, src_.order[i]);
      std::vector<std::size_t> block;
      for (std::size_t i : rest)
        if (src_.order[i] == top && denominator_of(from_.b(src_.coords[i], src_.coords[i])) == top) {
          block = {i};
          break;
        }
      for (std::size_t a = 0; block.empty() && a < rest.size(); ++a) {
        const std::size_t x = rest[a];
        if (src_.order[x] != top) continue;
        for (std::size_t c = a + 1; c < rest.size(); ++c) {
          const std::size_t y = rest[c];
          if (src_.order[y] == top && denominator_of(from_.b(src_.coords[x], src_.coords[y])) == top) {
            block = {x, y};
            break;
          }
        }
      }
      if (block.empty()) throw PreconditionError("isometry test requires nondegenerate forms");
      block_sizes_.push_back(block.size());
      for (std::size_t z : block) {
        basis_.push_back(z);
        rest = orthogonal(from_, src_, rest, z);
      }
    }
    levels_.push_back(histogram(src_, rest));

    // Coordinates of the original generators in the block basis.
    std::vector<Int> radix;
    for (std::size_t z : basis_) radix.push_back(src_.order[z]);
    std::map<Int, std::vector<Int>> coords_of;
    std::vector<Int> c(basis_.size(), 0);
    for (;;) {
      Coords x = from_.zero();
      for (std::size_t j = 0; j < c.size(); ++j) x = from_.add(x, from_.scale(src_.coords[basis_[j]], c[j]));
      coords_of.emplace(from_.index_of(x), c);
      std::size_t j = 0;
      while (j < c.size() && ++c[j] == radix[j]) c[j++] = 0;
      if (j == c.size()) break;
    }
    if (coords_of.size() != src_.coords.size())
      throw std::logic_error("orthogonal blocks do not span the group");
    for (std::size_t g = 0; g < from_.num_generators(); ++g)
      generator_coords_.push_back(coords_of.at(from_.index_of(from_.unit(g))));
  }

  bool matches(std::size_t w, std::size_t z) const { return dst_.order[w] == src_.order[z] && dst_.q[w] == src_.q[z]; }

  bool descend(std::size_t level, const std::vector<std::size_t>& allowed) {
    if (histogram(dst_, allowed) != levels_[level]) return false;
    if (level == block_sizes_.size()) return true;
    std::size_t first = 0;
    for (std::size_t l = 0; l < level; ++l) first += block_sizes_[l];
    const std::size_t z1 = basis_[first];
    for (std::size_t w1 : allowed) {
      if (!matches(w1, z1)) continue;
      if (++nodes_ > kNodeBudget) throw CapExceededError("isometry search budget exhausted");
      images_[first] = w1;
      const std::vector<std::size_t> after1 = orthogonal(to_, dst_, allowed, w1);
      if (block_sizes_[level] == 1) {
        if (descend(level + 1, after1)) return true;
        continue;
      }
      const std::size_t z2 = basis_[first + 1];
      const Rational b12 = from_.b(src_.coords[z1], src_.coords[z2]);
      for (std::size_t w2 : allowed) {
        if (!matches(w2, z2) || to_.b(dst_.coords[w1], dst_.coords[w2]) != b12) continue;
        if (++nodes_ > kNodeBudget) throw CapExceededError("isometry search budget exhausted");
        images_[first + 1] = w2;
        if (descend(level + 1, orthogonal(to_, dst_, after1, w2))) return true;
      }
    }
    return false;
  }

  const FiniteQuadraticForm& from_;
  const FiniteQuadraticForm& to_;
  ElementTable src_;
  ElementTable dst_;
  std::vector<std::size_t> dst_all_;
  std::vector<std::size_t> basis_;        // element indices in src_
  std::vector<std::size_t> block_sizes_;  // 1 or 2 per block
  std::vector<Histogram> levels_;         // source complement histograms, one per level
  std::vector<std::vector<Int>> generator_coords_;
  std::vector<std::size_t> images_;       // element indices in dst_
  std::size_t nodes_ = 0;
};

// Generators of the p-part: indices i with p | d_i, and m_i with d_i = p^k·m_i.
std::vector<std::pair<std::size_t, Int>> p_generators(const std::vector<Int>& orders, Int p) {
  std::vector<std::pair<std::size_t, Int>> out;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] % p != 0) continue;
    Int m = orders[i];
    while (m % p == 0) m /= p;
    out.emplace_back(i, m);
  }
  return out;
}

bool preserves_between(const FiniteQuadraticForm& from, const FiniteQuadraticForm& to,
                       const GroupAutomorphism& a) {
  const std::size_t k = from.num_generators();
  std::vector<Coords> img(k);
  for (std::size_t i = 0; i < k; ++i) {
    img[i] = a.images().col(i);
    if (to.q(img[i]) != from.q(from.unit(i))) return false;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (to.b(img[i], img[j]) != from.b(from.unit(i), from.unit(j))) return false;
  return true;
}

Int inverse_mod(Int a, Int n) {
  for (Int x = 1; x < n; ++x)
    if (mul_mod(a, x, n) == 1 % n) return x;
  return n == 1 ? 0 : throw std::logic_error("no inverse");
}

}  // namespace

std::optional<GroupAutomorphism> find_fqf_isometry(const FiniteQuadraticForm& from,
                                                   const FiniteQuadraticForm& to, Int cap) {
  if (from.prime_power_invariants() != to.prime_power_invariants()) return std::nullopt;

  // The p-parts are orthogonal and canonical, so the forms are isometric iff
  // every pair of p-parts is. g_i splits as Σ_p (m_i⁻¹ mod p^k)·(m_i·g_i).
  IntMatrix images(to.num_generators(), from.num_generators());
  std::set<Int> primes;
  for (Int d : from.orders())
    for (const auto& [p, e] : factorize(d)) primes.insert(p);
  for (Int p : primes) {
    const FiniteQuadraticForm fp = from.p_part(p);
    const FiniteQuadraticForm tp = to.p_part(p);
    if (!fp.is_nondegenerate(cap) || !tp.is_nondegenerate(cap))
      throw PreconditionError("isometry test requires nondegenerate forms");
    const auto part = BlockSearch(fp, tp, cap).run();
    if (!part) return std::nullopt;
    const auto src = p_generators(from.orders(), p);
    const auto dst = p_generators(to.orders(), p);
    for (std::size_t a = 0; a < src.size(); ++a) {
      const auto [i, m] = src[a];
      const Int unit = inverse_mod(m % fp.orders()[a], fp.orders()[a]);
      for (std::size_t c = 0; c < dst.size(); ++c) {
        const auto [j, m_to] = dst[c];
        const Int coeff = mul_mod(mul_mod((*part)(c, a), unit, to.orders()[j]), m_to, to.orders()[j]);
        images(j, i) = floor_mod(images(j, i) + coeff, to.orders()[j]);
      }
    }
  }
  GroupAutomorphism result(from.orders(), to.orders(), std::move(images));
  if (!preserves_between(from, to, result)) throw std::logic_error("assembled map is not an isometry");
  return result;
}

bool fqf_isometric(const FiniteQuadraticForm& a, const FiniteQuadraticForm& b, Int cap) {
  return find_fqf_isometry(a, b, cap).has_value();
}

FqfAutomorphismGroup fqf_automorphisms(const FiniteQuadraticForm& form, Int cap, std::size_t max_elements) {
  if (!form.is_nondegenerate(cap)) throw PreconditionError("O(q) requires a nondegenerate form");
  const ElementTable table = tabulate(form, cap);
  FqfAutomorphismGroup group{form.orders(), {}};
  IsometrySearch(form, form, table).run([&](GroupAutomorphism a) {
    if (group.elements.size() >= max_elements)
      throw CapExceededError("O(q) has more than " + std::to_string(max_elements) + " elements");
    group.elements.push_back(std::move(a));
    return true;
  });
  std::sort(group.elements.begin(), group.elements.end());
  return group;
}

// ---------------------------------------------------------------- u(2) / v(2) components

std::optional<ComponentWitness> has_u2_or_v2_component(const FiniteQuadraticForm& form,
                                                       std::size_t max_torsion_rank) {
  const FiniteQuadraticForm two = form.p_part(2);
  const std::size_t k = two.num_generators();
  if (k > max_torsion_rank)
    throw CapExceededError("2-torsion of rank " + std::to_string(k) + " exceeds the cap 2^" +
                           std::to_string(max_torsion_rank));
  if (k < 2) return std::nullopt;

  // Basis of the 2-torsion: t_i = (d_i / 2)·g_i.
  std::vector<Coords> basis(k);
  for (std::size_t i = 0; i < k; ++i) {
    basis[i] = two.zero();
    basis[i][i] = two.orders()[i] / 2;
  }
  auto element = [&](std::uint32_t mask) {
    Coords x = two.zero();
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1u << i)) x = two.add(x, basis[i]);
    return x;
  };
  // b is F2-bilinear on the 2-torsion with values in {0, 1/2}.
  const Rational half(1, 2);
  std::vector<std::uint32_t> b_rows(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (two.b(basis[i], basis[j]) == half) b_rows[i] |= 1u << j;

  const std::uint32_t count = 1u << k;
  std::vector<Rational> q(count);
  std::vector<std::uint32_t> pairing_row(count, 0);
  for (std::uint32_t m = 1; m < count; ++m) {
    q[m] = two.q(element(m));
    for (std::size_t i = 0; i < k; ++i)
      if (m & (1u << i)) pairing_row[m] ^= b_rows[i];
  }
  // For each generator g_a of the 2-part, the bit 2·b(g_a, z) for z in the torsion.
  std::vector<std::uint32_t> generator_pairing(k, 0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < k; ++i)
      if (two.b(two.unit(a), basis[i]) == half) generator_pairing[a] |= 1u << i;

  const Int order = two.group_order();
  const Rational zero_q(0), one_q(1);
  for (std::uint32_t x = 1; x < count; ++x) {
    const bool x0 = q[x] == zero_q;
    if (!x0 && q[x] != one_q) continue;
    for (std::uint32_t y = x + 1; y < count; ++y) {
      if ((std::popcount(pairing_row[x] & y) & 1) == 0) continue;  // b(x, y) = 1/2
      if (q[y] != (x0 ? zero_q : one_q)) continue;
      // H⊥ is the kernel of z ↦ (b(z, x), b(z, y)); its image is spanned by the
      // images of the generators.
      std::set<std::uint32_t> span{0};
      for (std::size_t a = 0; a < k; ++a) {
        const std::uint32_t v = static_cast<std::uint32_t>(std::popcount(generator_pairing[a] & x) & 1) |
                                (static_cast<std::uint32_t>(std::popcount(generator_pairing[a] & y) & 1) << 1);
        std::set<std::uint32_t> grown = span;
        for (auto s : span) grown.insert(s ^ v);
        span = std::move(grown);
      }
      const Int complement_order = order / static_cast<Int>(span.size());
      // H ∩ H⊥ = 0: none of x, y, x+y pairs trivially with both x and y.
      bool meets = false;
      for (std::uint32_t h : {x, y, x ^ y}) {
        if ((std::popcount(pairing_row[h] & x) & 1) == 0 && (std::popcount(pairing_row[h] & y) & 1) == 0)
          meets = true;
      }
      if (meets || checked_mul(complement_order, 4) != order) continue;
      return ComponentWitness{x0 ? "u2" : "v2", element(x), element(y), complement_order};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- element counts

Int order_dividing_count(const FiniteQuadraticForm& form, Int d) {
  if (d < 1) throw PreconditionError("order must be >= 1");
  Int count = 1;
  for (Int di : form.orders()) count = checked_mul(count, gcd(d, di));
  return count;
}

Int order_d_element_count(const FiniteQuadraticForm& form, Int d) {
  if (d < 1) throw PreconditionError("order must be >= 1");
  // Möbius inversion over the divisors of d of the "order divides e" counts.
  const auto primes = factorize(d);
  Int total = 0;
  const std::size_t subsets = std::size_t{1} << primes.size();
  for (std::size_t s = 0; s < subsets; ++s) {
    Int e = d;
    int sign = 1;
    for (std::size_t i = 0; i < primes.size(); ++i) {
      if (s & (std::size_t{1} << i)) {
        e /= primes[i].first;
        sign = -sign;
      }
    }
    const Int c = order_dividing_count(form, e);
    total = sign > 0 ? checked_add(total, c) : checked_sub(total, c);
  }
  return total;
}

}  // namespace fmlat
