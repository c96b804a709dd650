// Acceptance suite: one PASS/FAIL line per criterion, each with its pinned
// runtime limit. `acceptance --only N` runs a single criterion.

#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fmlat/counting.hpp"
#include "fmlat/discriminant.hpp"
#include "fmlat/fqf.hpp"
#include "fmlat/isometry.hpp"
#include "fmlat/lattice.hpp"
#include "fmlat/scenario.hpp"
#include "fmlat/serialize.hpp"
#include "fmlat/smith.hpp"
#include "support.hpp"

using namespace fmlat;

namespace {

constexpr double kGaussTolerance = 1e-9;

struct Outcome {
  bool pass = true;
  std::vector<std::string> failures;
  std::string summary;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // 0: no runtime limit
  std::function<Outcome()> body;
};

Lattice lat(const char* expr) { return parse_lattice_expr(expr); }

// All automorphisms of (Z/3)^2 preserving q, by enumerating the 81 matrices.
std::set<GroupAutomorphism> brute_force_orthogonal_group_u3() {
  const FiniteQuadraticForm q = discriminant_form(Lattice::hyperbolic(3));
  std::set<GroupAutomorphism> out;
  for (Int a = 0; a < 3; ++a)
    for (Int b = 0; b < 3; ++b)
      for (Int c = 0; c < 3; ++c)
        for (Int d = 0; d < 3; ++d) {
          if ((a * d - b * c) % 3 == 0) continue;
          const GroupAutomorphism m(q.orders(), IntMatrix{{a, b}, {c, d}});
          bool ok = true;
          for (Int i = 0; i < q.group_order() && ok; ++i) {
            const Coords x = q.element_at(i);
            ok = q.q(m.apply(x)) == q.q(x);
          }
          if (ok) out.insert(m);
        }
  return out;
}

Outcome criterion1() {
  Outcome o;
  const Lattice u3 = Lattice::hyperbolic(3);
  const IsometrySet iso = lattice_isometries(u3);
  o.require(iso.elements.size() == 4, "|O(U(3))| = " + std::to_string(iso.elements.size()) + ", expected 4");
  o.require(iso.complete, "isometry enumeration not certified complete");
  for (const auto& m : iso.elements) o.require(is_isometry(u3.gram(), m), "enumerated matrix is not an isometry");

  const auto brute = brute_force_orthogonal_group_u3();
  o.require(brute.size() == 4, "brute-force |O(A_U(3))| = " + std::to_string(brute.size()));
  std::set<GroupAutomorphism> image;
  for (const auto& m : iso.elements) image.insert(discriminant_action(u3, m));
  o.require(image == brute, "image of O(U(3)) differs from the brute-force O(A_U(3))");

  const SurjectivityReport s = is_surjective_on_discriminant(u3);
  o.require(s.verdict == Verdict::surjective, "surjectivity verdict " + to_string(s.verdict));
  o.require(s.target_order == 4, "library |O(q)| = " + std::to_string(s.target_order));
  o.summary = "|O(U(3))| = " + std::to_string(iso.elements.size()) + ", |O(A)| = " + std::to_string(brute.size()) +
              " (brute force), image " + std::to_string(image.size());
  return o;
}

Outcome criterion2() {
  Outcome o;
  auto expect = [&](const Lattice& l, std::vector<Int> orders) {
    const DiscriminantGroup g = discriminant_group(l);
    o.require(g.cyclic_orders() == orders, l.expression() + ": wrong cyclic orders");
    o.require(g.order() == std::abs(l.det()), l.expression() + ": |A| != |det|");
  };
  expect(Lattice::hyperbolic(2), {2, 2});
  expect(Lattice::hyperbolic(3), {3, 3});
  expect(Lattice::e8(-2), std::vector<Int>(8, 2));
  for (Int n = 1; n <= 10; ++n) expect(Lattice::rank_one(-2 * n), {2 * n});
  o.summary = "U(2), U(3), E8(-2), <-2N> for N = 1..10";
  return o;
}

// Σ exp(πi·q(x)) / √|A| against exp(2πiσ/8), summed directly over elements.
double gauss_defect(const FiniteQuadraticForm& q, Int sigma) {
  const long double pi = std::numbers::pi_v<long double>;
  std::complex<long double> sum = 0;
  for (Int i = 0; i < q.group_order(); ++i) {
    const Rational v = q.q(q.element_at(i));
    sum += std::polar(1.0L, pi * static_cast<long double>(v.num()) / static_cast<long double>(v.den()));
  }
  sum /= std::sqrt(static_cast<long double>(q.group_order()));
  const std::complex<long double> expected = std::polar(1.0L, 2 * pi * static_cast<long double>(sigma) / 8);
  return static_cast<double>(std::abs(sum - expected));
}

Outcome criterion3() {
  Outcome o;
  std::vector<Lattice> lattices{Lattice::hyperbolic(),   Lattice::hyperbolic(2), Lattice::hyperbolic(3),
                                Lattice::hyperbolic(-4), Lattice::e8(),          Lattice::e8(-1),
                                Lattice::e8(2),          Lattice::e8(-2),        Lattice::rank_one(2),
                                Lattice::rank_one(-2),   Lattice::rank_one(6),   Lattice::rank_one(-20),
                                Lattice::k3()};
  for (int i = 0; i < 20; ++i) lattices.push_back(testing::random_even_block_sum(12));
  double worst = 0;
  for (const auto& l : lattices) {
    const FiniteQuadraticForm q = discriminant_form(l);
    const Int index = l.signature().index();
    const int sigma = gauss_milgram_signature(q);
    o.require(sigma == ((index % 8) + 8) % 8, l.expression() + ": Gauss-Milgram " + std::to_string(sigma) +
                                                  " vs signature index " + std::to_string(index));
    const double defect = gauss_defect(q, index);
    worst = std::max(worst, defect);
    o.require(defect < kGaussTolerance, l.expression() + ": Gauss sum defect " + std::to_string(defect));
  }
  std::ostringstream s;
  s << lattices.size() << " lattices (13 constructors, 20 random), worst defect " << std::scientific
    << std::setprecision(1) << worst;
  o.summary = s.str();
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (Int n = 2; n <= 50; ++n) {
    const ScenarioReport r = run_scenario("enriques-FN", {{"N", n}});
    const NikulinReport nk = nikulin_check(r.embedding->transcendental);
    o.require(nk.condition_a_holds() && nk.condition_b.holds && nk.conclusion,
              "F_N transcendental lattice fails for N = " + std::to_string(n));
  }
  const NikulinReport e = nikulin_check(lat("U+U(2)+E8(-2)"));
  o.require(e.conclusion, "U+U(2)+E8(-2) fails the criterion");

  const NikulinReport u3 = nikulin_check(Lattice::hyperbolic(3));
  const bool fails_at_3 = u3.condition_a.size() == 1 && u3.condition_a[0].p == 3 && !u3.condition_a[0].holds;
  o.require(fails_at_3, "U(3) does not fail (a) at p = 3");
  o.require(!u3.conclusion, "U(3) passes the criterion");

  const ScenarioReport b = run_scenario("bielliptic-2-rho2");
  o.require(b.count && b.count->total == 1, "U(3) scenario count is not 1");
  o.require(b.count && b.count->shortcut == "surjective", "U(3) scenario count not via surjectivity");
  o.summary = "F_N for N = 2..50 pass; U(3) fails (a) at p = 3 yet counts 1 via surjectivity";
  return o;
}

Outcome criterion5() {
  Outcome o;
  const BinaryGenusScan scan = binary_genus_scan(-9, 5, 10);
  const FiniteQuadraticForm q_u3 = discriminant_form(Lattice::hyperbolic(3));
  std::size_t like_u3 = 0;
  for (const auto& c : scan.classes) like_u3 += fqf_isometric(c.form, q_u3) ? 1 : 0;
  o.require(scan.classes.size() == 4, "scan found " + std::to_string(scan.classes.size()) + " classes, expected 4");
  o.require(like_u3 == 1, std::to_string(like_u3) + " classes have q isometric to q_U(3), expected 1");
  o.summary = std::to_string(scan.classes.size()) + " classes, " + std::to_string(like_u3) + " with q = q_U(3)";
  return o;
}

Outcome criterion6() {
  Outcome o;
  const TwistedCheck t = twisted_partner_check(lat("U+U(2)+E8(-2)"));
  o.require(t.order2_count == 1023, "order-2 count " + std::to_string(t.order2_count));
  o.require(totient_order_bound(12) == 42, "totient_order_bound(12) = " + std::to_string(totient_order_bound(12)));
  o.require(t.hodge_bound == 42, "hodge bound " + std::to_string(t.hodge_bound));
  o.require(t.partner_exists, "no twisted partner");
  o.summary = "I^2 = " + std::to_string(t.order2_count) + " > " + std::to_string(t.hodge_bound);
  return o;
}

std::string expected_bound(const std::string& id) {
  if (id.starts_with("bielliptic-") && id != "bielliptic-1") return "≤2";
  return "=1";
}

Outcome criterion7(const std::string& manifest_path) {
  Outcome o;
  std::ifstream in(manifest_path);
  if (!in) {
    o.require(false, "cannot read " + manifest_path);
    return o;
  }
  std::stringstream text;
  text << in.rdbuf();
  const auto requests = parse_manifest(text.str());
  std::set<std::string> ids;
  for (const auto& r : requests) ids.insert(r.id);
  o.require(ids.size() == scenario_ids().size(), "manifest covers " + std::to_string(ids.size()) + " ids");

  const auto entries = run_batch(requests);
  for (const auto& e : entries) {
    const std::string where = "entry " + std::to_string(e.index) + " (" + e.id + ")";
    if (!e.report) {
      o.require(false, where + ": " + e.error);
      continue;
    }
    o.require(e.report->partner_count_bound == expected_bound(e.id), where + ": bound " + e.report->partner_count_bound);
    if (expected_bound(e.id) == "≤2") o.require(e.report->partner_set == "{A, Â}", where + ": set " + e.report->partner_set);
    for (const auto& step : e.report->chain)
      o.require(step.kind == "computation" || !step.citations.empty(), where + ": uncited step");
  }
  o.summary = std::to_string(entries.size()) + " entries over " + std::to_string(ids.size()) + " scenario ids";
  return o;
}

Outcome criterion8() {
  Outcome o;
  // SNF contract and determinantal divisors.
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = static_cast<std::size_t>(testing::uniform(1, 8));
    const auto cols = static_cast<std::size_t>(testing::uniform(1, 8));
    const IntMatrix m = testing::random_matrix(rows, cols, 50);
    const SmithDecomposition s = smith_normal_form(m);
    bool ok = s.left * BigMatrix(m) * s.right == BigMatrix(s.diagonal_matrix(rows, cols)) &&
              s.left * s.left_inverse == BigMatrix::identity(rows) &&
              s.right * s.right_inverse == BigMatrix::identity(cols) &&
              s.diagonal == testing::determinantal_divisors(m);
    for (std::size_t i = 0; i + 1 < s.diagonal.size(); ++i)
      ok = ok && (s.diagonal[i] == 0 ? s.diagonal[i + 1] == 0 : s.diagonal[i + 1] % s.diagonal[i] == 0);
    o.require(ok, "SNF contract fails on trial " + std::to_string(trial));
  }

  // q_L(x + v) ≡ q_L(x) mod 2 for lifts x and lattice vectors v, from the raw Gram matrix.
  for (int trial = 0; trial < 100; ++trial) {
    const Lattice l = testing::random_even_block_sum(12);
    const DiscriminantGroup g = discriminant_group(l);
    const FiniteQuadraticForm q = discriminant_form(l);
    Coords c(g.cyclic_orders().size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = testing::uniform(0, g.cyclic_orders()[i] - 1);
    std::vector<Rational> y = g.lift(c);
    for (auto& v : y) v = v + Rational(testing::uniform(-5, 5));
    Rational value = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j) value = value + y[i] * Rational(l.gram()(i, j)) * y[j];
    o.require(value.mod(2) == q.q(c), l.expression() + ": q depends on the lift");
    o.require(g.coordinates_of(y) == q.normalize(c), l.expression() + ": coordinates depend on the lift");
  }

  // Double cosets against union-find orbits in permutation groups of order <= 200.
  int checked = 0;
  while (checked < 20) {
    const int n = static_cast<int>(testing::uniform(4, 6));
    const auto g = testing::closure({testing::random_perm(n), testing::random_perm(n)}, n);
    if (g.size() > 200 || g.size() < 4) continue;
    auto pick = [&] { return g[static_cast<std::size_t>(testing::uniform(0, static_cast<Int>(g.size()) - 1))]; };
    const std::vector<testing::Perm> h_gens{pick()};
    const std::vector<testing::Perm> k_gens{pick(), pick()};
    const auto d = double_cosets(g, testing::closure(h_gens, n), testing::closure(k_gens, n));
    o.require(d.count == testing::union_find_double_cosets(g, h_gens, k_gens),
              "double coset count mismatch in a group of order " + std::to_string(g.size()));
    ++checked;
  }
  o.summary = "100 SNF, 100 lifts, 20 double-coset pairs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string manifest = FMLAT_FULL_MANIFEST;
  app.add_option("--only", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
  app.add_option("--manifest", manifest, "Scenario manifest for criterion 7")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "O(U(3)) has 4 elements and maps onto O(A_U(3))", 1.0, criterion1},
      {2, "discriminant groups of U(2), U(3), E8(-2), <-2N>", 1.0, criterion2},
      {3, "Gauss-Milgram signature mod 8", 10.0, criterion3},
      {4, "Nikulin checker on F_N, U+U(2)+E8(-2) and U(3)", 5.0, criterion4},
      {5, "binary genus scan of det -9", 60.0, criterion5},
      {6, "twisted partner check on U+U(2)+E8(-2)", 1.0, criterion6},
      {7, "full scenario manifest", 30.0, [&] { return criterion7(manifest); }},
      {8, "property suites: SNF, q_L lifts, double cosets", 0.0, criterion8},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0 || seconds < c.limit_seconds;
    if (!in_time) o.require(false, "runtime over the limit");
    all = all && o.pass;

    std::ostringstream timing;
    timing << std::fixed << std::setprecision(3) << seconds << " s";
    if (c.limit_seconds != 0) timing << " < " << c.limit_seconds << " s";
    std::cout << "C" << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << "  [" << timing.str() << "]";
    if (!o.summary.empty()) std::cout << "  " << o.summary;
    std::cout << "\n";
    for (const auto& f : o.failures) std::cout << "     - " << f << "\n";
  }
  return all ? 0 : 1;
}
