#include "doctest.h"

#include <array>
#include <numeric>
#include <set>

#include "fmlat/counting.hpp"
#include "fmlat/discriminant.hpp"
#include "fmlat/errors.hpp"
#include "fmlat/isometry.hpp"
#include "fmlat/lattice.hpp"
#include "support.hpp"

using namespace fmlat;
using fmlat::testing::closure;
using fmlat::testing::Perm;
using fmlat::testing::random_perm;
using fmlat::testing::uniform;
using fmlat::testing::union_find_double_cosets;

namespace {

Lattice sum(std::initializer_list<Lattice> parts) {
  auto it = parts.begin();
  Lattice out = *it++;
  for (; it != parts.end(); ++it) out = direct_sum(out, *it);
  return out;
}

Lattice enriques() { return sum({Lattice::hyperbolic(2), Lattice::e8(-2)}); }
Lattice enriques_t() { return sum({Lattice::hyperbolic(), Lattice::hyperbolic(2), Lattice::e8(-2)}); }
Lattice f_n(Int n) { return sum({Lattice::hyperbolic(2), Lattice::e8(-2), Lattice::rank_one(-2 * n)}); }
Lattice f_n_t(Int n) { return sum({Lattice::hyperbolic(2), Lattice::e8(-2), Lattice::rank_one(2 * n)}); }
Lattice g_m(Int m) { return sum({Lattice::hyperbolic(), Lattice::e8(-2), Lattice::rank_one(-4 * m)}); }
Lattice g_m_t(Int m) { return sum({Lattice::hyperbolic(), Lattice::e8(-2), Lattice::rank_one(4 * m)}); }

}  // namespace

TEST_CASE("nikulin_check: generic Enriques transcendental lattice") {
  const NikulinReport r = nikulin_check(enriques_t());
  CHECK(r.condition_a.empty());  // |det| = 2^10
  CHECK_FALSE(r.condition_b.applicable);
  CHECK(r.condition_b.holds);
  CHECK(r.condition_b.l_2 == 10);
  CHECK(r.conclusion);
  CHECK(r.genus_unique());
  CHECK(r.surjective());
}

TEST_CASE("nikulin_check: F_N side, odd p-parts have length one") {
  for (Int n : {2, 3, 5, 6, 9, 15}) {
    CAPTURE(n);
    const NikulinReport r = nikulin_check(f_n_t(n));
    for (const auto& c : r.condition_a) {
      CHECK(c.l_p == 1);
      CHECK(c.holds);
      CHECK(n % c.p == 0);
    }
    CHECK(r.condition_b.applicable);  // rank 11 = l_2
    CHECK(r.condition_b.holds);
    REQUIRE(r.condition_b.witness);
    CHECK(r.conclusion);
  }
}

TEST_CASE("nikulin_check: U(3) fails (a) at p = 3") {
  const NikulinReport r = nikulin_check(Lattice::hyperbolic(3));
  REQUIRE(r.condition_a.size() == 1);
  CHECK(r.condition_a[0].p == 3);
  CHECK(r.condition_a[0].l_p == 2);
  CHECK_FALSE(r.condition_a[0].holds);
  CHECK_FALSE(r.conclusion);
}

TEST_CASE("nikulin_check: U(2) passes through a u(2) component") {
  const NikulinReport r = nikulin_check(Lattice::hyperbolic(2));
  CHECK(r.condition_b.applicable);
  REQUIRE(r.condition_b.witness);
  CHECK(r.condition_b.witness->kind == "u2");
  CHECK(r.conclusion);
}

TEST_CASE("nikulin_check: preconditions") {
  CHECK_THROWS_AS(nikulin_check(Lattice::e8(-2)), PreconditionError);
  CHECK_THROWS_AS(nikulin_check(Lattice::rank_one(2)), PreconditionError);
  CHECK_THROWS_AS(nikulin_check(Lattice(IntMatrix{{1, 0}, {0, -1}})), PreconditionError);
}

TEST_CASE("nikulin_check: (a) agrees with p_analysis per prime") {
  for (int trial = 0; trial < 30; ++trial) {
    const Lattice l = fmlat::testing::random_even_block_sum(10);
    if (!l.is_indefinite()) continue;
    NikulinReport r = [&] {
      try {
        return nikulin_check(l);
      } catch (const CapExceededError&) {
        return NikulinReport{.lattice = l};
      }
    }();
    for (const auto& c : r.condition_a) {
      const PAnalysis pa = p_analysis(l, c.p);
      CHECK(c.l_p == pa.l_p);
      CHECK(c.holds == (l.rank() >= pa.l_p + 2));
    }
    CHECK(r.condition_b.applicable == (l.rank() <= p_analysis(l, 2).l_p));
  }
}

TEST_CASE("double cosets: small examples") {
  const std::vector<Int> z5{5};
  const auto units = generate_group(z5, {GroupAutomorphism::scalar(z5, 2)});
  REQUIRE(units.order() == 4);
  const auto pm = generate_group(z5, {GroupAutomorphism::scalar(z5, -1)});
  const auto one = generate_group(z5, {});
  CHECK(double_coset_count(units, pm, one) == 2);
  CHECK(double_coset_count(units, units, pm) == 1);
  CHECK(double_coset_count(units, one, one) == 4);

  const Lattice u3 = Lattice::hyperbolic(3);
  const auto ambient = fqf_automorphisms(discriminant_form(u3));
  REQUIRE(ambient.order() == 4);
  const auto image = induced_on_discriminant(u3, lattice_isometries(u3)).image;
  CHECK(image.order() == 4);
  CHECK(double_coset_count(ambient, image, generate_group(ambient.orders, {})) == 1);
}

TEST_CASE("double cosets: closure violations are named") {
  const std::vector<Int> z5{5};
  const auto units = generate_group(z5, {GroupAutomorphism::scalar(z5, 2)});
  const std::vector<GroupAutomorphism> not_closed{GroupAutomorphism::identity(z5), GroupAutomorphism::scalar(z5, 2)};
  try {
    double_cosets(units.elements, not_closed, units.elements);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("left") != std::string::npos);
  }
  CHECK_THROWS_AS(double_cosets(units.elements, units.elements, not_closed), PreconditionError);
  const std::vector<GroupAutomorphism> outside{GroupAutomorphism::identity(z5), GroupAutomorphism::scalar(z5, 0)};
  CHECK_THROWS_AS(double_cosets(units.elements, outside, units.elements), PreconditionError);
}

TEST_CASE("double cosets: random permutation groups against union-find orbits") {
  int checked = 0;
  while (checked < 20) {
    const int n = static_cast<int>(uniform(4, 6));
    const auto g = closure({random_perm(n), random_perm(n)}, n);
    if (g.size() > 200 || g.size() < 4) continue;
    auto pick = [&] { return g[static_cast<std::size_t>(uniform(0, static_cast<Int>(g.size()) - 1))]; };
    const std::vector<Perm> h_gens{pick()};
    const std::vector<Perm> k_gens{pick(), pick()};
    const auto h = closure(h_gens, n);
    const auto k = closure(k_gens, n);
    const DoubleCosets d = double_cosets(g, h, k);
    CAPTURE(g.size());
    CHECK(d.count == union_find_double_cosets(g, h_gens, k_gens));
    CHECK(std::accumulate(d.sizes.begin(), d.sizes.end(), std::size_t{0}) == g.size());
    // H\G/K and K\G/H are in bijection through inversion.
    CHECK(double_cosets(g, k, h).count == d.count);
    // Full left subgroup gives one double coset.
    CHECK(double_cosets(g, g, k).count == 1);
    ++checked;
  }
}

TEST_CASE("totient_order_bound") {
  CHECK(totient_order_bound(12) == 42);
  CHECK(totient_order_bound(4) == 12);
  CHECK(totient_order_bound(1) == 2);
  CHECK(totient_order_bound(2) == 6);
  for (Int r = 1; r <= 12; ++r) {
    Int best = 0;
    for (Int m = 1; m <= 400; ++m) {
      Int phi = 0;
      for (Int k = 1; k <= m; ++k) phi += std::gcd(k, m) == 1;
      if (r % phi == 0) best = m;
    }
    CHECK(totient_order_bound(r) == best);
  }
  CHECK_THROWS_AS(totient_order_bound(0), PreconditionError);
}

TEST_CASE("twisted_partner_check") {
  const TwistedCheck e = twisted_partner_check(enriques_t());
  CHECK(e.order2_count == 1023);
  CHECK(e.hodge_bound == 42);
  CHECK(e.partner_exists);
  CHECK(e.argument.find("lower bound") != std::string::npos);

  const TwistedCheck uu = twisted_partner_check(sum({Lattice::hyperbolic(), Lattice::hyperbolic()}));
  CHECK(uu.order2_count == 0);
  CHECK(uu.hodge_bound == totient_order_bound(4));
  CHECK_FALSE(uu.partner_exists);

  const TwistedCheck u2 = twisted_partner_check(sum({Lattice::hyperbolic(), Lattice::hyperbolic(2)}));
  CHECK(u2.order2_count == 3);
  CHECK(u2.hodge_bound == 12);
  CHECK_FALSE(u2.partner_exists);
}

TEST_CASE("half_det_prime_count") {
  CHECK(half_det_prime_count(2) == 0);
  CHECK(half_det_prime_count(-60) == 3);  // 30 = 2·3·5
  CHECK(half_det_prime_count(-4) == 1);
  CHECK_THROWS_AS(half_det_prime_count(9), PreconditionError);
}

TEST_CASE("GHodgeSpec parsing and validation") {
  CHECK(GHodgeSpec::parse("trivial").mode == GHodgeSpec::Mode::trivial);
  CHECK(GHodgeSpec::parse("pm").mode == GHodgeSpec::Mode::plus_minus);
  CHECK(GHodgeSpec::parse("cyclic(42)").cyclic_order == 42);
  CHECK(GHodgeSpec::parse("cyclic:6").describe() == "cyclic(6)");
  CHECK_THROWS_AS(GHodgeSpec::parse("cyclic(x)"), PreconditionError);
  CHECK_THROWS_AS(GHodgeSpec::parse("whatever"), PreconditionError);
  // rank T = 12: phi(5) = 4 divides it, phi(11) = 10 does not.
  CHECK_NOTHROW(fm_count_k3(enriques(), enriques_t(), GHodgeSpec::cyclic(5)));
  CHECK_THROWS_AS(fm_count_k3(enriques(), enriques_t(), GHodgeSpec::cyclic(11)), PreconditionError);
}

TEST_CASE("fm_count_k3: Enriques covers") {
  const FmCountReport e = fm_count_k3(enriques(), enriques_t());
  CHECK(e.total == 1);
  CHECK(e.per_rep_count == std::vector<Int>{1});
  CHECK(e.shortcut == "nikulin");
  CHECK(e.ghodge == "plus_minus");
  CHECK_FALSE(e.citations.empty());

  for (Int n = 2; n <= 10; ++n) {
    CAPTURE(n);
    const FmCountReport r = fm_count_k3(f_n(n), f_n_t(n));
    CHECK(r.total == 1);
    CHECK(r.shortcut == "nikulin");
  }
  for (Int m = 1; m <= 4; ++m) {
    CAPTURE(m);
    const FmCountReport r = fm_count_k3(g_m(m), g_m_t(m));
    CHECK(r.total == 1);
    CHECK(r.shortcut == "hyperbolic-summand");
    bool cites_embedding = false;
    for (const auto& c : r.citations) cites_embedding |= c.paper_location.find("1.14.4") != std::string::npos;
    CHECK(cites_embedding);
  }
}

TEST_CASE("fm_count: surjectivity makes every G_Hodge mode give the same count") {
  for (const auto& g : {GHodgeSpec::trivial(), GHodgeSpec::plus_minus(), GHodgeSpec::cyclic(2)}) {
    CHECK(fm_count_k3(enriques(), enriques_t(), g).total == 1);
    CHECK(fm_count_abelian(Lattice::hyperbolic(3), sum({Lattice::hyperbolic(3), Lattice::hyperbolic()}), g).total ==
          1);
  }
}

TEST_CASE("fm_count_abelian: products and bielliptic quotients") {
  const FmCountReport u3 = fm_count_abelian(Lattice::hyperbolic(3), sum({Lattice::hyperbolic(3), Lattice::hyperbolic()}));
  CHECK(u3.total == 1);
  CHECK(u3.shortcut == "surjective");
  CHECK(u3.genus_reps.size() == 1);
  CHECK(u3.genus_certificate.find("binary scan") != std::string::npos);
  CHECK(u3.interpretation.find("{B, B^}") != std::string::npos);

  const FmCountReport u2 = fm_count_abelian(Lattice::hyperbolic(2), sum({Lattice::hyperbolic(2), Lattice::hyperbolic()}));
  CHECK(u2.total == 1);
  CHECK(u2.shortcut == "nikulin");

  const FmCountReport u = fm_count_abelian(Lattice::hyperbolic(), sum({Lattice::hyperbolic(), Lattice::hyperbolic()}));
  CHECK(u.total == 1);
  CHECK(u.shortcut == "hyperbolic-summand");
}

TEST_CASE("fm_count: rank-one Picard lattices count double cosets") {
  // NS = <2n>, T = <-2n> + U + U + E8(-1)^2. |O(Z/2n, q)| = 2^s for s = #primes of n
  // (n squarefree), G_Hodge = ±1 and O(NS) = ±1: the count is 2^(s-1).
  for (Int n : {1, 2, 3, 6, 15, 30}) {
    CAPTURE(n);
    const Lattice ns = Lattice::rank_one(2 * n);
    const Lattice t = sum({Lattice::rank_one(-2 * n), Lattice::hyperbolic(), Lattice::hyperbolic(), Lattice::e8(-1),
                           Lattice::e8(-1)});
    const FmCountReport r = fm_count_k3(ns, t);
    const std::size_t s = n == 1 ? 0 : factorize(n).size();
    CHECK(r.total == (s == 0 ? 1 : Int{1} << (s - 1)));
    CHECK(r.total >= 1);
  }
}

TEST_CASE("fm_count: explicit G_Hodge generators are transported") {
  const Lattice ns = Lattice::rank_one(30);
  const Lattice t = sum({Lattice::rank_one(-30), Lattice::hyperbolic(), Lattice::hyperbolic(), Lattice::e8(-1),
                         Lattice::e8(-1)});
  const auto orders = discriminant_form(t).orders();
  const FmCountReport scalar = fm_count_k3(ns, t, GHodgeSpec::explicit_generators({GroupAutomorphism::scalar(orders, -1)}));
  CHECK(scalar.total == fm_count_k3(ns, t).total);
  CHECK(scalar.total == 2);  // 15 = 3·5
  // -1 already comes from O(NS), so dropping it from G_Hodge changes nothing.
  CHECK(fm_count_k3(ns, t, GHodgeSpec::trivial()).total == 2);
  // <60>: |O(q)| = 8; adding x -> 11x to G_Hodge halves the count.
  const Lattice ns60 = Lattice::rank_one(60);
  const Lattice t60 = sum({Lattice::rank_one(-60), Lattice::hyperbolic(), Lattice::hyperbolic(), Lattice::e8(-1),
                           Lattice::e8(-1)});
  const auto orders60 = discriminant_form(t60).orders();
  CHECK(fm_count_k3(ns60, t60).total == 4);
  const FmCountReport eleven = fm_count_k3(ns60, t60, GHodgeSpec::explicit_generators({GroupAutomorphism::scalar(orders60, 11)}));
  CHECK(eleven.total == 2);
  REQUIRE(eleven.details.size() == 1);
  CHECK(eleven.details[0].method == "double-cosets");
  CHECK(eleven.details[0].ambient_order == 8);
  CHECK(eleven.details[0].right_order == 2);
  CHECK_THROWS_AS(fm_count_k3(ns, t, GHodgeSpec::explicit_generators({GroupAutomorphism::scalar(orders, 2)})),
                  PreconditionError);
}

TEST_CASE("fm_count: preconditions") {
  CHECK_THROWS_AS(fm_count_k3(enriques(), enriques()), PreconditionError);              // rank 20
  CHECK_THROWS_AS(fm_count_abelian(Lattice::hyperbolic(3), sum({Lattice::hyperbolic(2), Lattice::hyperbolic()})),
                  PreconditionError);                                                    // forms differ
  CHECK_THROWS_AS(fm_count_k3(f_n(2), f_n_t(2), GHodgeSpec::plus_minus(), {Lattice::hyperbolic(2)}),
                  PreconditionError);                                                    // bad representative
}
