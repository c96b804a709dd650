#include "fmlat/scenario.hpp"

#include <future>
#include <set>
#include <thread>

#include "fmlat/discriminant.hpp"
#include "fmlat/errors.hpp"
#include "fmlat/fqf.hpp"
#include "fmlat/isometry.hpp"

namespace fmlat {

namespace {

// Λ = E8(-1) + E8(-1) + U + U + U: E8 blocks at 0..7 and 8..15, U_i at
// (16 + 2i, 17 + 2i). U³ = U + U + U: U_i at (2i, 2i + 1).
constexpr std::size_t kLambdaRank = 22;
constexpr std::size_t kE8Second = 8;
constexpr std::size_t kLambdaU = 16;
constexpr std::size_t kAbelianRank = 6;

using Vec = std::vector<Int>;

Vec vec(std::size_t n, std::initializer_list<std::pair<std::size_t, Int>> entries) {
  Vec v(n, 0);
  for (auto [i, c] : entries) v[i] += c;
  return v;
}

Lattice sum(std::initializer_list<Lattice> parts) {
  auto it = parts.begin();
  Lattice out = *it++;
  for (; it != parts.end(); ++it) out = direct_sum(out, *it);
  return out;
}

Lattice abelian_ambient() { return sum({Lattice::hyperbolic(), Lattice::hyperbolic(), Lattice::hyperbolic()}); }

const Citation kDerivedTorelli{"Two K3 surfaces are derived equivalent iff their transcendental lattices are Hodge isometric",
                               "Orlov 1997, Equivalences of derived categories and K3 surfaces"};
const Citation kTorelli{"K3 surfaces with Hodge isometric H^2 are isomorphic", "Piatetski-Shapiro-Shafarevich 1971"};
const Citation kNamikawa{"Every isometry of U+U(2)+E8(-2) extends to an isometry of the K3 lattice",
                         "Namikawa 1985, Periods of Enriques surfaces, Thm. 1.4"};
const Citation kOhashi{"Picard lattices of rank 11 of K3 covers of Enriques surfaces are F_N = U(2)+E8(-2)+<-2N> "
                       "(N >= 2) or G_M = U+E8(-2)+<-4M> (M >= 1)",
                       "Ohashi 2007, On the number of Enriques quotients of a K3 surface, Prop. 3.5"};
const Citation kMukaiRank12{"A K3 surface of Picard rank >= 12 has no nontrivial Fourier-Mukai partners",
                            "Mukai 1987, On the moduli space of bundles on K3 surfaces I"};
const Citation kOrlovAbelian{"Derived equivalent abelian surfaces have Hodge isometric transcendental lattices",
                             "Orlov 2002, Derived categories of coherent sheaves on abelian varieties"};
const Citation kShioda{"A Hodge isometry H^2(A, Z) -> H^2(B, Z) forces B to be A or its dual",
                       "Shioda 1978, The period map of abelian surfaces, Thm. 1"};
const Citation kSelfDual{"A product of elliptic curves is principally polarized, hence isomorphic to its dual",
                         "Birkenhake-Lange, Complex abelian varieties"};
const Citation kBielliptic{"Bielliptic surfaces are (E x F)/G with G in Z/n (n = 2, 3, 4, 6), (Z/3)^2, (Z/2)^2, "
                           "Z/4 x Z/2",
                           "Barth-Hulek-Peters-Van de Ven, Compact complex surfaces, Ch. V.5"};
const Citation kPElementary{"An even indefinite p-elementary lattice is unique in its genus",
                            "Artebani-Sarti-Taki 2011, Thm. 1.1"};

struct Builder {
  ScenarioReport r;

  void computation(std::string statement) { r.chain.push_back({"computation", std::move(statement), {}}); }
  void citation(std::string statement, std::vector<Citation> cites) {
    r.chain.push_back({"citation", std::move(statement), std::move(cites)});
  }
  void embedding(Embedding e) {
    computation("NS = " + e.ns.expression() + " embedded primitively in " + e.ambient + " (" + e.description +
                "); T = NS^perp has rank " + std::to_string(e.transcendental.rank()) + ", det " +
                std::to_string(e.transcendental.det()));
    r.embedding = std::move(e);
  }
  void count(FmCountReport c) {
    computation("genus of NS: " + c.genus_certificate);
    const std::string how = c.shortcut.empty() ? "double cosets" : c.shortcut;
    citation("counting formula gives " + std::to_string(c.total) + " (" + how + ", G_Hodge " + c.ghodge + ")",
             c.citations);
    r.count = std::move(c);
  }
  const Embedding& emb() const { return *r.embedding; }
};

Int param(const ScenarioParams& p, const std::string& key, Int lo, std::optional<Int> hi = std::nullopt) {
  auto it = p.find(key);
  if (it == p.end()) throw PreconditionError("missing parameter " + key);
  if (it->second < lo || (hi && it->second > *hi))
    throw PreconditionError("parameter " + key + " = " + std::to_string(it->second) + " must be >= " +
                            std::to_string(lo) + (hi ? " and <= " + std::to_string(*hi) : std::string()));
  return it->second;
}

void allow_only(const ScenarioParams& p, std::set<std::string> keys) {
  for (const auto& [k, v] : p)
    if (!keys.contains(k)) throw PreconditionError("unexpected parameter " + k);
}

// U(2) on (e1+e2, f1+f2), E8(-2) on the diagonal of the two E8(-1) blocks.
std::vector<Vec> enriques_generators() {
  std::vector<Vec> gens;
  gens.push_back(vec(kLambdaRank, {{kLambdaU, 1}, {kLambdaU + 2, 1}}));
  gens.push_back(vec(kLambdaRank, {{kLambdaU + 1, 1}, {kLambdaU + 3, 1}}));
  for (std::size_t i = 0; i < 8; ++i) gens.push_back(vec(kLambdaRank, {{i, 1}, {i + kE8Second, 1}}));
  return gens;
}

Lattice enriques_lattice() { return sum({Lattice::hyperbolic(2), Lattice::e8(-2)}); }

void enriques_notes(ScenarioReport& r) {
  r.notes.push_back(
      "Hilbert schemes: if Hilb^n(X) and Hilb^n(Y) are birational for K3 covers X, Y of Enriques surfaces, they are "
      "isomorphic, since the universal covers are derived equivalent and X carries one free involution");
  r.notes.push_back(
      "Enriques manifolds: Hilb^n(X)/(Z/2) for odd n is an Enriques manifold; derived equivalences of such "
      "quotients lift to the covers");
}

ScenarioReport enriques_generic(const ScenarioParams& p) {
  allow_only(p, {});
  Builder b;
  b.r.surface = "k3";
  b.embedding(embed(Lattice::k3(), "Lambda", enriques_generators(), enriques_lattice(),
                    "U(2) on e1+e2, f1+f2; E8(-2) on the diagonal of E8(-1)+E8(-1)"));
  const Lattice& t = b.emb().transcendental;
  NikulinReport nik = nikulin_check(t);
  const Lattice model = sum({Lattice::hyperbolic(), Lattice::hyperbolic(2), Lattice::e8(-2)});
  if (nik.conclusion && t.signature() == model.signature() &&
      fqf_isometric(discriminant_form(t), discriminant_form(model)))
    b.citation("T has the signature and discriminant form of U+U(2)+E8(-2) and its genus has one class, so "
               "T is isometric to U+U(2)+E8(-2)",
               {nik.citation});
  else
    throw PreconditionError("transcendental lattice of the generic Enriques cover is not U+U(2)+E8(-2)");
  b.r.nikulin_transcendental = std::move(nik);
  b.citation("every isometry of T extends to the K3 lattice; with the Torelli theorem X is determined by T",
             {kNamikawa, kTorelli, kDerivedTorelli});
  b.count(fm_count_k3(b.emb().ns, t));
  b.r.partner_count_bound = "=1";
  b.r.partner_set = "{X}";
  enriques_notes(b.r);
  return b.r;
}

ScenarioReport enriques_fn(const ScenarioParams& p) {
  allow_only(p, {"N"});
  const Int n = param(p, "N", 2);
  Builder b;
  b.r.surface = "k3";
  b.citation("NS(X) = F_N = U(2)+E8(-2)+<-2N>, one of the two rank-11 series", {kOhashi});
  auto gens = enriques_generators();
  gens.push_back(vec(kLambdaRank, {{kLambdaU + 4, 1}, {kLambdaU + 5, -n}}));
  b.embedding(embed(Lattice::k3(), "Lambda", gens, sum({enriques_lattice(), Lattice::rank_one(-2 * n)}),
                    "F_N: U(2) and E8(-2) as for E, <-2N> on e3 - N f3"));
  b.count(fm_count_k3(b.emb().ns, b.emb().transcendental));
  b.citation("derived equivalence is a Hodge isometry of transcendental lattices", {kDerivedTorelli});
  b.r.partner_count_bound = "=1";
  b.r.partner_set = "{X}";
  enriques_notes(b.r);
  return b.r;
}

ScenarioReport enriques_gm(const ScenarioParams& p) {
  allow_only(p, {"M"});
  const Int m = param(p, "M", 1);
  Builder b;
  b.r.surface = "k3";
  b.citation("NS(X) = G_M = U+E8(-2)+<-4M>, one of the two rank-11 series", {kOhashi});
  std::vector<Vec> gens;
  gens.push_back(vec(kLambdaRank, {{kLambdaU, 1}}));
  gens.push_back(vec(kLambdaRank, {{kLambdaU + 1, 1}}));
  for (std::size_t i = 0; i < 8; ++i) gens.push_back(vec(kLambdaRank, {{i, 1}, {i + kE8Second, 1}}));
  gens.push_back(vec(kLambdaRank, {{kLambdaU + 4, 1}, {kLambdaU + 5, -2 * m}}));
  b.embedding(embed(Lattice::k3(), "Lambda", gens,
                    sum({Lattice::hyperbolic(), Lattice::e8(-2), Lattice::rank_one(-4 * m)}),
                    "G_M: U on e1, f1; E8(-2) on the diagonal; <-4M> on e3 - 2M f3"));
  b.count(fm_count_k3(b.emb().ns, b.emb().transcendental));
  b.r.partner_count_bound = "=1";
  b.r.partner_set = "{X}";
  enriques_notes(b.r);
  return b.r;
}

// Sample NS of rank rho: U + E8(-1) + <-2>^j + (the first k simple roots of the
// second E8(-1)), with j = min(2, rho - 10) and k = rho - 10 - j.
ScenarioReport k3_rank_ge_12(const ScenarioParams& p) {
  allow_only(p, {"rho"});
  const Int rho = param(p, "rho", 12, 20);
  Builder b;
  b.r.surface = "k3";
  b.citation("Picard rank " + std::to_string(rho) + " >= 12: no nontrivial Fourier-Mukai partners", {kMukaiRank12});
  b.citation("rank arithmetic: l(A_NS) = l(A_T) <= rank T = " + std::to_string(22 - rho) +
                 " <= rank NS - 2 = " + std::to_string(rho - 2) +
                 ", so Nikulin's conditions hold for every NS of this rank",
             {Citation{"Nikulin's criterion", "Nikulin 1979, Integral symmetric bilinear forms, Thm. 1.14.2"}});

  const Int j = std::min<Int>(2, rho - 10);
  const Int k = rho - 10 - j;
  std::vector<Vec> gens;
  gens.push_back(vec(kLambdaRank, {{kLambdaU, 1}}));
  gens.push_back(vec(kLambdaRank, {{kLambdaU + 1, 1}}));
  for (std::size_t i = 0; i < 8; ++i) gens.push_back(vec(kLambdaRank, {{i, 1}}));
  Lattice expected = sum({Lattice::hyperbolic(), Lattice::e8(-1)});
  for (Int i = 0; i < j; ++i) {
    const std::size_t u = kLambdaU + 2 + 2 * static_cast<std::size_t>(i);
    gens.push_back(vec(kLambdaRank, {{u, 1}, {u + 1, -1}}));
    expected = direct_sum(expected, Lattice::rank_one(-2));
  }
  if (k > 0) {
    IntMatrix roots(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
    const IntMatrix e8 = Lattice::e8(-1).gram();
    for (std::size_t a = 0; a < roots.rows(); ++a) {
      gens.push_back(vec(kLambdaRank, {{kE8Second + a, 1}}));
      for (std::size_t c = 0; c < roots.cols(); ++c) roots(a, c) = e8(a, c);
    }
    expected = direct_sum(expected, Lattice(roots));
  }
  b.embedding(embed(Lattice::k3(), "Lambda", gens, expected,
                    "sample NS: U on e1, f1; E8(-1) on the first E8 block; <-2> on e_i - f_i; simple roots of the "
                    "second E8 block"));
  const Lattice& t = b.emb().transcendental;
  if (t.is_indefinite()) {
    NikulinReport nik = nikulin_check(t);
    b.computation(std::string("Nikulin's criterion on the sample T: ") + (nik.conclusion ? "holds" : "fails"));
    b.r.nikulin_transcendental = std::move(nik);
  } else {
    b.computation("sample T is definite; Nikulin's criterion needs an indefinite lattice, the rank rule applies");
  }
  b.count(fm_count_k3(b.emb().ns, t));
  b.r.partner_count_bound = "=1";
  b.r.partner_set = "{X}";
  b.r.notes.push_back("the same argument applies to Hilbert schemes of points on K3 surfaces of Picard rank >= 12");
  return b.r;
}

ScenarioReport twisted_enriques_generic(const ScenarioParams& p) {
  allow_only(p, {});
  Builder b;
  b.r.surface = "k3";
  b.embedding(embed(Lattice::k3(), "Lambda", enriques_generators(), enriques_lattice(),
                    "U(2) on e1+e2, f1+f2; E8(-2) on the diagonal of E8(-1)+E8(-1)"));
  const Lattice& t = b.emb().transcendental;
  TwistedCheck tw = twisted_partner_check(t);
  b.citation("NS = U(2)+E8(-2) is 2-elementary, so twisted partners only occur for Brauer classes of order 1, 2",
             {tw.citations.at(0)});
  b.citation("O_Hodge(T) is cyclic with phi(|O_Hodge|) dividing rank T = " + std::to_string(t.rank()) +
                 ", so |O_Hodge(T)| <= " + std::to_string(tw.hodge_bound),
             {tw.citations.at(1)});
  b.computation("|I^2(A_T)| = " + std::to_string(tw.order2_count) + "; " + tw.argument);
  if (!tw.partner_exists) throw PreconditionError("twisted check failed for the generic Enriques cover");
  b.count(fm_count_k3(b.emb().ns, t));
  b.r.twisted = std::move(tw);
  b.r.partner_count_bound = "=1";
  b.r.partner_set = "{X}; a twisted partner (X', alpha) with alpha of order 2 exists";
  b.r.notes.push_back(
      "twisting X as well gives arbitrarily many twisted partners: Kummer surfaces of Picard rank 20 cover Enriques "
      "surfaces");
  return b.r;
}

void abelian_common(Builder& b, bool self_dual) {
  b.citation("a derived equivalence gives a Hodge isometry of T; when it extends to H^2, the partner is A or its dual",
             {kOrlovAbelian, kShioda});
  if (self_dual) {
    b.citation("A is a product of elliptic curves, so A is isomorphic to its dual", {kSelfDual});
    b.r.partner_count_bound = "=1";
    b.r.partner_set = "{A}";
  } else {
    b.r.partner_count_bound = "≤2";
    b.r.partner_set = "{A, Â}";
  }
  b.r.notes.push_back(
      "generalised Kummer varieties: K_n(A) birational to K_n(B) (n >= 2) forces B to be A or its dual");
  const Int det = b.emb().ns.det();
  if (det % 2 == 0)
    b.r.notes.push_back("s(A) = " + std::to_string(half_det_prime_count(det)) +
                        " primes divide |det NS|/2; 2^s(A) is the partner count only when End(A) = Z");
}

ScenarioReport bielliptic_1(const ScenarioParams& p) {
  allow_only(p, {"N"});
  Builder b;
  b.r.surface = "abelian";
  b.citation("case (1): G cyclic of order 2, 3, 4 or 6 and the canonical cover is E x F", {kBielliptic});
  std::vector<Vec> gens{vec(kAbelianRank, {{0, 1}}), vec(kAbelianRank, {{1, 1}})};
  Lattice expected = Lattice::hyperbolic();
  std::string description = "U on e1, f1";
  if (p.contains("N")) {
    const Int n = param(p, "N", 1);
    gens.push_back(vec(kAbelianRank, {{2, 1}, {3, -n}}));
    expected = direct_sum(expected, Lattice::rank_one(-2 * n));
    description += "; <-2N> on e2 - N f2 (isogenous factors)";
  }
  b.embedding(embed(abelian_ambient(), "U+U+U", gens, expected, description));
  b.count(fm_count_abelian(b.emb().ns, b.emb().transcendental));
  abelian_common(b, true);
  return b.r;
}

ScenarioReport bielliptic_2_rho2(const ScenarioParams& p) {
  allow_only(p, {});
  Builder b;
  b.r.surface = "abelian";
  b.citation("case (2): G = (Z/3)^2, cover (E x F)/(Z/3) with E, F not isogenous, NS = U(3)", {kBielliptic});
  b.embedding(embed(abelian_ambient(), "U+U+U",
                    {vec(kAbelianRank, {{0, 1}}), vec(kAbelianRank, {{1, 3}, {2, 1}})}, Lattice::hyperbolic(3),
                    "U(3) on e1, 3 f1 + e2"));
  const IsometrySet iso = lattice_isometries(b.emb().ns);
  b.computation("O(U(3)) = {±id, ±swap}: " + std::to_string(iso.elements.size()) + " isometries, " + iso.certificate);
  b.citation("alternatively U(3) is 3-elementary and indefinite", {kPElementary});
  b.count(fm_count_abelian(b.emb().ns, b.emb().transcendental));
  abelian_common(b, false);
  return b.r;
}

ScenarioReport bielliptic_34_rho2(const ScenarioParams& p) {
  allow_only(p, {});
  Builder b;
  b.r.surface = "abelian";
  b.citation("cases (3), (4): cover (E x F)/(Z/2) with E, F not isogenous, NS = U(2)", {kBielliptic});
  b.embedding(embed(abelian_ambient(), "U+U+U",
                    {vec(kAbelianRank, {{0, 1}}), vec(kAbelianRank, {{1, 2}, {2, 1}})}, Lattice::hyperbolic(2),
                    "U(2) on e1, 2 f1 + e2"));
  b.count(fm_count_abelian(b.emb().ns, b.emb().transcendental));
  abelian_common(b, false);
  return b.r;
}

ScenarioReport bielliptic_3_rho3(const ScenarioParams& p) {
  allow_only(p, {"N"});
  const Int n = param(p, "N", 1);
  Builder b;
  b.r.surface = "abelian";
  b.citation("case (3) with Picard rank 3: NS(E x F) = U+<-2N> and the Z/2 quotient has NS = U(2)+<-4N>",
             {kBielliptic});
  b.embedding(embed(abelian_ambient(), "U+U+U",
                    {vec(kAbelianRank, {{0, 1}}), vec(kAbelianRank, {{1, 2}, {2, 1}}),
                     vec(kAbelianRank, {{4, 1}, {5, -2 * n}})},
                    sum({Lattice::hyperbolic(2), Lattice::rank_one(-4 * n)}), "U(2) on e1, 2 f1 + e2; <-4N> on e3 - 2N f3"));
  b.count(fm_count_abelian(b.emb().ns, b.emb().transcendental));
  abelian_common(b, false);
  return b.r;
}

using Runner = ScenarioReport (*)(const ScenarioParams&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"enriques-generic", enriques_generic},
      {"enriques-FN", enriques_fn},
      {"enriques-GM", enriques_gm},
      {"k3-rank-ge-12", k3_rank_ge_12},
      {"bielliptic-1", bielliptic_1},
      {"bielliptic-2-rho2", bielliptic_2_rho2},
      {"bielliptic-34-rho2", bielliptic_34_rho2},
      {"bielliptic-3-rho3", bielliptic_3_rho3},
      {"twisted-enriques-generic", twisted_enriques_generic},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids{"enriques-generic",  "enriques-FN",        "enriques-GM",
                                            "k3-rank-ge-12",     "bielliptic-1",       "bielliptic-2-rho2",
                                            "bielliptic-34-rho2", "bielliptic-3-rho3", "twisted-enriques-generic"};
  return ids;
}

Embedding embed(const Lattice& ambient, std::string ambient_name, std::vector<std::vector<Int>> generators,
                const Lattice& expected, std::string description) {
  const SublatticeSpec spec(ambient, generators);
  const IntMatrix m = spec.generator_matrix();
  if (m * ambient.gram() * m.transpose() != expected.gram())
    throw PreconditionError("embedding of " + expected.expression() + " does not induce its Gram matrix");
  if (!is_primitive_sublattice(spec).primitive)
    throw PreconditionError("embedding of " + expected.expression() + " is not primitive");
  Complement c = orthogonal_complement(spec);
  if (!c.lattice || c.degenerate) throw PreconditionError("complement of " + expected.expression() + " is degenerate");
  return Embedding{std::move(ambient_name), std::move(description), std::move(generators), expected,
                   std::move(*c.lattice)};
}

ScenarioReport run_scenario(const std::string& id, const ScenarioParams& params) {
  auto it = runners().find(id);
  if (it == runners().end()) throw PreconditionError("unknown scenario id '" + id + "'");
  ScenarioReport r = it->second(params);
  r.scenario_id = id;
  r.params = params;
  return r;
}

std::vector<BatchEntry> run_batch(const std::vector<ScenarioRequest>& requests) {
  auto run_one = [&requests](std::size_t i) {
    BatchEntry e;
    e.index = i;
    e.id = requests[i].id;
    try {
      e.report = run_scenario(requests[i].id, requests[i].params);
    } catch (const PreconditionError& ex) {
      e.error = ex.what();
      e.error_kind = "precondition";
    } catch (const CapExceededError& ex) {
      e.error = ex.what();
      e.error_kind = "cap";
    } catch (const UnsupportedError& ex) {
      e.error = ex.what();
      e.error_kind = "unsupported";
    } catch (const OverflowError& ex) {
      e.error = ex.what();
      e.error_kind = "overflow";
    } catch (const std::exception& ex) {
      e.error = ex.what();
      e.error_kind = "error";
    }
    return e;
  };
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  std::vector<BatchEntry> out;
  out.reserve(requests.size());
  for (std::size_t start = 0; start < requests.size(); start += width) {
    std::vector<std::future<BatchEntry>> wave;
    for (std::size_t i = start; i < std::min(requests.size(), start + width); ++i)
      wave.push_back(std::async(std::launch::async, run_one, i));
    for (auto& f : wave) out.push_back(f.get());
  }
  return out;
}

}  // namespace fmlat
