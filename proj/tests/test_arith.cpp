#include "doctest.h"

#include <limits>

#include "fmlat/arith.hpp"
#include "fmlat/errors.hpp"
#include "support.hpp"

using namespace fmlat;

TEST_CASE("checked arithmetic fails loudly") {
  const Int big = std::numeric_limits<Int>::max();
  CHECK_THROWS_AS(checked_add(big, 1), OverflowError);
  CHECK_THROWS_AS(checked_mul(big / 2 + 1, 2), OverflowError);
  CHECK_THROWS_AS(checked_neg(std::numeric_limits<Int>::min()), OverflowError);
  CHECK(checked_sub(-5, 7) == -12);
}

TEST_CASE("number theory helpers") {
  CHECK(gcd(-12, 18) == 6);
  CHECK(lcm(4, 6) == 12);
  CHECK(floor_div(-7, 2) == -4);
  CHECK(floor_mod(-7, 3) == 2);
  CHECK(mul_mod(-3, 5, 7) == 6);
  CHECK(is_prime(97));
  CHECK_FALSE(is_prime(91));
  CHECK(euler_phi(42) == 12);
  CHECK(euler_phi(1) == 1);
  CHECK(is_perfect_square(49));
  CHECK_FALSE(is_perfect_square(-9));
  const auto f = factorize(-360);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == std::pair<Int, int>{2, 3});
  CHECK(f[2] == std::pair<Int, int>{5, 1});
}

TEST_CASE("euler_phi agrees with a coprimality count") {
  for (Int n = 1; n <= 200; ++n) {
    Int count = 0;
    for (Int k = 1; k <= n; ++k) count += gcd(k, n) == 1;
    CHECK(euler_phi(n) == count);
  }
}

TEST_CASE("rationals stay reduced") {
  const Rational a(6, -4);
  CHECK(a.num() == -3);
  CHECK(a.den() == 2);
  CHECK((a + Rational(1, 2)) == Rational(-1));
  CHECK(Rational(7, 3).mod(2) == Rational(1, 3));
  CHECK(Rational(-1, 4).mod(2) == Rational(7, 4));
  CHECK(Rational(-1, 3).str() == "-1/3");
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK_THROWS_AS(Rational(1, 0), PreconditionError);
}

TEST_CASE("Bareiss determinant matches cofactor expansion") {
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(testing::uniform(1, 6));
    const IntMatrix m = testing::random_matrix(n, n, 9);
    CHECK(determinant(m) == testing::laplace_det(m));
  }
}

TEST_CASE("matrix helpers") {
  const IntMatrix a{{1, 2}, {3, 4}};
  CHECK(a.transpose() == IntMatrix{{1, 3}, {2, 4}});
  CHECK(a * IntMatrix::identity(2) == a);
  const IntMatrix g{{0, 1}, {1, 0}};
  CHECK(congruence(g, a) == a.transpose() * g * a);
  CHECK(block_diagonal(a, IntMatrix{{5}}) == IntMatrix{{1, 2, 0}, {3, 4, 0}, {0, 0, 5}});
}
