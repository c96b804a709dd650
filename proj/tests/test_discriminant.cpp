#include "doctest.h"

#include <string>

#include "fmlat/discriminant.hpp"
#include "fmlat/errors.hpp"
#include "fmlat/lattice.hpp"
#include "support.hpp"

using namespace fmlat;

namespace {

Lattice f_series(Int n) { return parse_lattice_expr("U(2)+E8(-2)+<" + std::to_string(-2 * n) + ">"); }

Int product(const std::vector<Int>& v) {
  Int p = 1;
  for (Int x : v) p *= x;
  return p;
}

// Pairing of two rational vectors under the Gram matrix, computed entrywise.
Rational pair(const IntMatrix& g, const std::vector<Rational>& x, const std::vector<Rational>& y) {
  Rational s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) s += x[i] * Rational(g(i, j)) * y[j];
  return s;
}

const IntMatrix kD4{{2, -1, 0, 0}, {-1, 2, -1, -1}, {0, -1, 2, 0}, {0, -1, 0, 2}};

}  // namespace

TEST_CASE("discriminant groups of the basic constructors") {
  CHECK(discriminant_group(Lattice::hyperbolic(2)).cyclic_orders() == std::vector<Int>{2, 2});
  CHECK(discriminant_group(Lattice::hyperbolic(3)).cyclic_orders() == std::vector<Int>{3, 3});
  CHECK(discriminant_group(Lattice::e8(-2)).cyclic_orders() == std::vector<Int>(8, 2));
  CHECK(discriminant_group(Lattice::hyperbolic()).cyclic_orders().empty());
  for (Int n = 1; n <= 10; ++n) {
    const auto a = discriminant_group(Lattice::rank_one(-2 * n));
    CHECK(a.cyclic_orders() == std::vector<Int>{2 * n});
    CHECK(a.order() == 2 * n);
  }
}

TEST_CASE("discriminant group of the F_N series") {
  for (Int n = 2; n <= 10; ++n) {
    const Lattice f = f_series(n);
    const auto a = discriminant_group(f);
    CHECK(a.order() == std::abs(f.det()));
    CHECK(a.order() == (Int{1} << 11) * n);
    std::vector<Int> expected(10, 2);
    expected.push_back(2 * n);
    CHECK(a.cyclic_orders() == expected);
  }
}

TEST_CASE("generator lifts lie in the dual and have the right orders") {
  for (const char* expr : {"U(3)", "U(2)+E8(-2)+<-6>", "U+<-4>+<6>"}) {
    const Lattice l = parse_lattice_expr(expr);
    const auto a = discriminant_group(l);
    for (std::size_t i = 0; i < a.cyclic_orders().size(); ++i) {
      const auto& x = a.generator_lifts()[i];
      // x ∈ L*: integral pairing with every basis vector.
      for (std::size_t k = 0; k < l.rank(); ++k) {
        std::vector<Rational> e(l.rank(), Rational(0));
        e[k] = 1;
        CHECK(pair(l.gram(), x, e).is_integer());
      }
      // d_i·x ∈ L but (d_i/p)·x ∉ L.
      const Int d = a.cyclic_orders()[i];
      for (const auto& c : x) CHECK((c * Rational(d)).is_integer());
      Coords unit(a.cyclic_orders().size(), 0);
      unit[i] = 1;
      CHECK(a.coordinates_of(x) == unit);
    }
  }
}

TEST_CASE("discriminant forms") {
  const auto u2 = discriminant_form(Lattice::hyperbolic(2));
  CHECK(u2 == fqf_standard("u2"));
  CHECK(u2.q(Coords{1, 1}) == Rational(1));

  const auto u3 = discriminant_form(Lattice::hyperbolic(3));
  CHECK(u3.orders() == std::vector<Int>{3, 3});
  CHECK(u3.q_generator(0) == Rational(0));
  CHECK(u3.q_generator(1) == Rational(0));
  const Rational cross = u3.b_generator(0, 1);
  CHECK(((cross == Rational(1, 3)) || (cross == Rational(2, 3))));

  for (Int n = 1; n <= 10; ++n) {
    const auto q = discriminant_form(Lattice::rank_one(-4 * n));
    CHECK(q.orders() == std::vector<Int>{4 * n});
    // Oracle: b(1/4N, 1/4N) = -4N / (4N)^2.
    CHECK(q.q_generator(0) == Rational(-1, 4 * n).mod(2));
  }

  CHECK_THROWS_WITH_AS(discriminant_form(Lattice::rank_one(3)), "q_L requires an even lattice",
                       PreconditionError);
  const auto b = discriminant_bilinear_form(Lattice::rank_one(3));
  REQUIRE(b.size() == 1);
  CHECK(b[0][0] == Rational(1, 3));
}

TEST_CASE("v(2) is the discriminant form of D4") {
  const Lattice d4(kD4);
  CHECK(d4.det() == 4);
  const auto q = discriminant_form(d4);
  CHECK(fqf_isometric(q, fqf_standard("v2")));
  CHECK_FALSE(fqf_isometric(q, fqf_standard("u2")));
}

TEST_CASE("p-analysis") {
  const auto u2 = p_analysis(Lattice::hyperbolic(2), 2);
  CHECK(u2.is_p_elementary);
  CHECK(u2.a == 2);
  CHECK(u2.l_p == 2);

  const auto u3 = p_analysis(Lattice::hyperbolic(3), 3);
  CHECK(u3.is_p_elementary);
  CHECK(u3.a == 2);
  CHECK(u3.l_p == 2);

  for (Int n : {3, 5, 7, 9}) {
    const auto f = p_analysis(f_series(n), 2);
    CHECK_FALSE(f.is_p_elementary);
    CHECK(f.l_p == 11);
    CHECK(p_analysis(f_series(n), 3).l_p == (n % 3 == 0 ? 1u : 0u));
  }
  CHECK_THROWS_AS(p_analysis(Lattice::hyperbolic(2), 4), PreconditionError);
}

TEST_CASE("transcendental lattice of the Enriques cover has the expected form") {
  std::vector<std::vector<Int>> gens;
  for (std::size_t i = 0; i < 8; ++i) {
    std::vector<Int> v(22, 0);
    v[i] = v[i + 8] = 1;
    gens.push_back(v);
  }
  std::vector<Int> e(22, 0), f(22, 0);
  e[16] = e[18] = 1;
  f[17] = f[19] = 1;
  gens.push_back(e);
  gens.push_back(f);
  const auto c = orthogonal_complement(SublatticeSpec(Lattice::k3(), gens));
  REQUIRE(c.lattice);
  const auto expected = discriminant_form(parse_lattice_expr("U+U(2)+E8(-2)"));
  CHECK(fqf_isometric(discriminant_form(*c.lattice), expected));
  // Sign check: q_T ≅ -q_NS for a primitive embedding into a unimodular lattice.
  CHECK(fqf_isometric(expected, discriminant_form(parse_lattice_expr("U(2)+E8(-2)")).negated()));
}

TEST_CASE("property: |A_L| = |det L|") {
  for (const char* expr : {"U", "U(2)", "U(3)", "E8", "E8(-2)", "<-2>", "<4>", "Lambda", "U+U(2)+E8(-2)"}) {
    const Lattice l = parse_lattice_expr(expr);
    CHECK(discriminant_group(l).order() == std::abs(l.det()));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Lattice l = testing::random_even_block_sum(12);
    const auto a = discriminant_group(l);
    CHECK(product(a.cyclic_orders()) == std::abs(l.det()));
    for (std::size_t i = 0; i + 1 < a.cyclic_orders().size(); ++i)
      CHECK(a.cyclic_orders()[i + 1] % a.cyclic_orders()[i] == 0);
  }
}

TEST_CASE("property: q is well defined on 100 random lifts") {
  for (int trial = 0; trial < 100; ++trial) {
    const Lattice l = testing::random_even_block_sum(10);
    const auto a = discriminant_group(l);
    const auto q = discriminant_form(l);
    Coords x(a.cyclic_orders().size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = testing::uniform(0, a.cyclic_orders()[i] - 1);
    auto lift = a.lift(x);
    for (auto& c : lift) c += Rational(testing::uniform(-5, 5));
    CHECK(a.coordinates_of(lift) == x);
    CHECK(pair(l.gram(), lift, lift).mod(2) == q.q(x));
  }
}

TEST_CASE("property: polarization on generator pairs") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = discriminant_form(testing::random_even_block_sum(12));
    for (std::size_t i = 0; i < q.num_generators(); ++i)
      for (std::size_t j = 0; j < q.num_generators(); ++j) {
        const Coords gi = q.unit(i), gj = q.unit(j);
        const Rational lhs = q.b(gi, gj);
        const Rational rhs = ((q.q(q.add(gi, gj)) - q.q(gi) - q.q(gj)) * Rational(1, 2)).mod(1);
        CHECK(lhs == rhs);
      }
  }
}

TEST_CASE("property: unimodular lattices rescaled by p") {
  CHECK(discriminant_group(Lattice::e8().scaled(-2)).cyclic_orders() == std::vector<Int>(8, 2));
  CHECK(discriminant_group(Lattice::hyperbolic().scaled(2)).cyclic_orders() == std::vector<Int>(2, 2));
  CHECK(discriminant_group(Lattice::hyperbolic().scaled(3)).cyclic_orders() == std::vector<Int>(2, 3));
  CHECK(discriminant_group(Lattice::e8().scaled(3)).cyclic_orders() == std::vector<Int>(8, 3));
}
