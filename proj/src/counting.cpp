#include "fmlat/counting.hpp"

#include <cctype>
#include <cmath>

#include "fmlat/discriminant.hpp"
#include "fmlat/isometry.hpp"

namespace fmlat {

namespace {

const Citation kNikulinGenus{
    "An even indefinite lattice T with rank T >= l(A_{T_p}) + 2 for every odd prime p, whose "
    "q_{T_2} splits off u(2) or v(2) when rank T = l(A_{T_2}), is unique in its genus and "
    "O(T) -> O(q_T) is surjective",
    "Nikulin 1979, Integral symmetric bilinear forms, Thm. 1.14.2"};

const Citation kNikulinHyperbolic{
    "If NS contains a hyperbolic plane U, every isometry of the transcendental lattice extends "
    "to the full cohomology lattice",
    "Nikulin 1979, Integral symmetric bilinear forms, Thm. 1.14.4"};

const Citation kHloyK3{"FM(X) = sum over the genus of NS(X) of |O(L_i) \\ O(A_{L_i}) / G_Hodge|",
                       "Hosono-Lian-Oguiso-Yau 2004, Fourier-Mukai number of a K3 surface"};

const Citation kHloyAbelian{
    "|P^eq(T(A), U^3)| = sum over the genus of NS(A) of |O(L_i) \\ O(A_{L_i}) / G_Hodge|; each "
    "class is a pair {B, B^}",
    "Hosono-Lian-Oguiso-Yau 2003, Kummer structures on a K3 surface: an old question of T. Shioda"};

const Citation kPElementary{"An even indefinite p-elementary lattice is determined by its rank, signature and "
                            "discriminant form",
                            "Artebani-Sarti-Taki 2011, K3 surfaces with non-symplectic automorphisms of prime "
                            "order, Thm. 1.1; Rudakov-Shafarevich for p = 2"};

const Citation kHodgeCyclic{"O_Hodge(T) is cyclic of order m with phi(m) dividing rank T",
                            "Nikulin 1979, Finite automorphism groups of Kaehler K3 surfaces"};

const Citation kMaTwisted{"Twisted partners of order d are counted by O_Hodge(T)-orbits on the order-d elements I^d(A_T); "
                          "for 2-elementary NS only d = 1, 2 occur",
                          "Ma 2009, Twisted Fourier-Mukai number of a K3 surface, Cor. 4.5"};

std::string join_orders(const std::vector<Int>& orders) {
  if (orders.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < orders.size(); ++i) s += (i ? "+" : "") + ("Z/" + std::to_string(orders[i]));
  return s;
}

}  // namespace

NikulinReport nikulin_check(const Lattice& t) {
  if (t.is_degenerate()) throw PreconditionError("Nikulin's criterion needs a nondegenerate lattice");
  if (!t.is_even()) throw PreconditionError("Nikulin's criterion needs an even lattice");
  if (!t.is_indefinite()) throw PreconditionError("Nikulin's criterion needs an indefinite lattice");

  NikulinReport out{.lattice = t, .condition_a = {}, .condition_b = {}, .conclusion = false,
                    .citation = kNikulinGenus};
  const FiniteQuadraticForm form = discriminant_form(t);
  const std::size_t rank = t.rank();
  for (const auto& [p, e] : factorize(t.det() < 0 ? -t.det() : t.det())) {
    if (p == 2) continue;
    const std::size_t l = p_length(form.orders(), p);
    out.condition_a.push_back({p, rank, l, rank >= l + 2});
  }
  auto& b = out.condition_b;
  b.l_2 = p_length(form.orders(), 2);
  b.applicable = rank <= b.l_2;
  if (b.applicable) {
    b.witness = has_u2_or_v2_component(form);
    b.holds = b.witness.has_value();
  } else {
    b.holds = true;
  }
  out.conclusion = out.condition_a_holds() && b.holds;
  return out;
}

std::size_t double_coset_count(const FqfAutomorphismGroup& ambient, const FqfAutomorphismGroup& left,
                               const FqfAutomorphismGroup& right) {
  if (left.orders != ambient.orders || right.orders != ambient.orders)
    throw PreconditionError("subgroups act on a different presentation than the ambient group");
  return double_cosets(ambient.elements, left.elements, right.elements).count;
}

GHodgeSpec GHodgeSpec::cyclic(Int m) {
  if (m < 1) throw PreconditionError("cyclic G_Hodge needs an order m >= 1");
  return {Mode::cyclic, m, {}};
}

GHodgeSpec GHodgeSpec::explicit_generators(std::vector<GroupAutomorphism> gens) {
  return {Mode::explicit_generators, 0, std::move(gens)};
}

GHodgeSpec GHodgeSpec::parse(const std::string& text) {
  if (text == "trivial") return trivial();
  if (text == "plus_minus" || text == "pm" || text == "+-") return plus_minus();
  std::string digits;
  if (text.starts_with("cyclic(") && text.ends_with(")"))
    digits = text.substr(7, text.size() - 8);
  else if (text.starts_with("cyclic:"))
    digits = text.substr(7);
  if (!digits.empty() && digits.size() <= 9 &&
      std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
    return cyclic(std::stoll(digits));
  throw PreconditionError("unknown G_Hodge mode '" + text + "' (expected trivial, plus_minus or cyclic(m))");
}

std::string GHodgeSpec::describe() const {
  switch (mode) {
    case Mode::trivial:
      return "trivial";
    case Mode::plus_minus:
      return "plus_minus";
    case Mode::cyclic:
      return "cyclic(" + std::to_string(cyclic_order) + ")";
    case Mode::explicit_generators:
      return "explicit(" + std::to_string(generators.size()) + " generators)";
  }
  return "";
}

Int totient_order_bound(Int r) {
  if (r < 1) throw PreconditionError("totient_order_bound needs r >= 1");
  const Int limit = checked_mul(2, checked_mul(r, r));
  Int best = 1;
  for (Int m = 1; m <= limit; ++m)
    if (r % euler_phi(m) == 0) best = m;
  return best;
}

namespace {

struct Genus {
  std::vector<Lattice> reps;
  std::string certificate;
  std::string shortcut;  // set when surjectivity is certified for the whole genus
  std::vector<Citation> citations;
};

void validate_pair(const Lattice& ns, const Lattice& t, std::size_t total_rank, std::size_t positive,
                   FmCountReport& report) {
  if (ns.rank() + t.rank() != total_rank)
    throw PreconditionError("rank NS + rank T must be " + std::to_string(total_rank) + ", got " +
                            std::to_string(ns.rank()) + " + " + std::to_string(t.rank()));
  if (!ns.is_even() || !t.is_even()) throw PreconditionError("NS and T must both be even");
  if (ns.signature().positive != 1)
    throw PreconditionError("NS must be hyperbolic (exactly one positive direction)");
  const Signature& a = ns.signature();
  const Signature& b = t.signature();
  if (a.positive + b.positive != positive || a.negative + b.negative != total_rank - positive)
    throw PreconditionError("signatures of NS and T do not add up to (" + std::to_string(positive) + ", " +
                            std::to_string(total_rank - positive) + ")");
  if (ns.det() != -t.det() && ns.det() != t.det())
    throw PreconditionError("|det NS| = " + std::to_string(ns.det()) + " differs from |det T| = " +
                            std::to_string(t.det()));
  const FiniteQuadraticForm q_ns = discriminant_form(ns);
  const FiniteQuadraticForm q_t = discriminant_form(t);
  try {
    if (!fqf_isometric(q_t, q_ns.negated()))
      throw PreconditionError("q_T is not isometric to -q_NS; T is not the complement of NS");
    report.certificates.push_back("q_T isometric to -q_NS on " + join_orders(q_ns.orders()));
  } catch (const CapExceededError& e) {
    report.certificates.push_back(std::string("q_T vs -q_NS not compared: ") + e.what());
  }
}

void validate_ghodge(const GHodgeSpec& g, const Lattice& t) {
  if (g.mode == GHodgeSpec::Mode::cyclic) {
    const Int phi = euler_phi(g.cyclic_order);
    if (static_cast<Int>(t.rank()) % phi != 0)
      throw PreconditionError("cyclic(" + std::to_string(g.cyclic_order) + ") needs phi(m) = " +
                              std::to_string(phi) + " to divide rank T = " + std::to_string(t.rank()));
  }
  if (g.mode == GHodgeSpec::Mode::explicit_generators) {
    const FiniteQuadraticForm q_t = discriminant_form(t);
    for (const auto& a : g.generators) {
      if (a.source_orders() != q_t.orders() || a.orders() != q_t.orders())
        throw PreconditionError("G_Hodge generator does not act on A_T = " + join_orders(q_t.orders()));
      if (!preserves_form(q_t, a)) throw PreconditionError("G_Hodge generator does not preserve q_T");
    }
  }
}

GroupAutomorphism power_inverse(const GroupAutomorphism& a) {
  GroupAutomorphism p = a;
  GroupAutomorphism prev = GroupAutomorphism::identity(a.orders());
  for (std::size_t i = 0; i < kMaxAutomorphisms; ++i) {
    if (p.is_identity()) return prev;
    prev = p;
    p = p * a;
  }
  throw CapExceededError("automorphism order exceeds the cap");
}

// The image of G_Hodge in O(q_L) for a genus representative L.
FqfAutomorphismGroup ghodge_image(const GHodgeSpec& g, const Lattice& t, const FiniteQuadraticForm& q_l) {
  const auto& orders = q_l.orders();
  Int m = g.cyclic_order;
  switch (g.mode) {
    case GHodgeSpec::Mode::trivial:
      return generate_group(orders, {});
    case GHodgeSpec::Mode::plus_minus:
      return generate_group(orders, {GroupAutomorphism::scalar(orders, -1)});
    case GHodgeSpec::Mode::cyclic:
      if (m == 1) return generate_group(orders, {});
      if (m == 2) return generate_group(orders, {GroupAutomorphism::scalar(orders, -1)});
      throw UnsupportedError("the image of a cyclic G_Hodge of order " + std::to_string(m) +
                             " in O(A) depends on the period; pass explicit generators");
    case GHodgeSpec::Mode::explicit_generators:
      break;
  }
  // Transport along an anti-isometry phi: (A_T, q_T) -> (A_L, -q_L).
  const FiniteQuadraticForm q_t = discriminant_form(t);
  const FiniteQuadraticForm target = q_l.negated();
  auto phi = find_fqf_isometry(q_t, target);
  auto psi = find_fqf_isometry(target, q_t);
  if (!phi || !psi) throw PreconditionError("q_T is not isometric to -q_L; cannot transport G_Hodge");
  const GroupAutomorphism phi_inv = *psi * power_inverse(*phi * *psi);
  std::vector<GroupAutomorphism> gens;
  for (const auto& a : g.generators) gens.push_back(*phi * a * phi_inv);
  return generate_group(orders, gens);
}

Genus determine_genus(const Lattice& ns, const std::vector<Lattice>& explicit_reps, FmCountReport& report) {
  Genus genus;
  const FiniteQuadraticForm q_ns = discriminant_form(ns);
  if (!explicit_reps.empty()) {
    for (const auto& l : explicit_reps) {
      if (!l.is_even() || l.signature() != ns.signature() || !fqf_isometric(discriminant_form(l), q_ns))
        throw PreconditionError("supplied representative " + l.expression() + " is not in the genus of NS");
    }
    genus.reps = explicit_reps;
    genus.certificate = "genus representatives supplied by the caller (" + std::to_string(explicit_reps.size()) + ")";
    return genus;
  }
  genus.reps = {ns};

  const HyperbolicSearch hyperbolic = has_hyperbolic_summand(ns);
  if (hyperbolic.pair) {
    genus.certificate = "NS contains U: " + hyperbolic.summary();
    genus.shortcut = "hyperbolic-summand";
    genus.citations = {kNikulinHyperbolic, kNikulinGenus};
    return genus;
  }
  report.certificates.push_back("hyperbolic summand: " + hyperbolic.summary());

  if (ns.is_indefinite()) {
    try {
      const NikulinReport nik = nikulin_check(ns);
      if (nik.conclusion) {
        genus.certificate = "Nikulin's criterion holds for NS";
        genus.shortcut = "nikulin";
        genus.citations = {kNikulinGenus};
        return genus;
      }
      report.certificates.push_back("Nikulin's criterion fails for NS");
    } catch (const CapExceededError& e) {
      report.certificates.push_back(std::string("Nikulin's criterion inconclusive for NS: ") + e.what());
    }
  }

  if (ns.rank() == 1) {
    genus.certificate = "a rank-one lattice is determined by its determinant";
    return genus;
  }

  if (ns.rank() == 2 && ns.is_indefinite()) {
    const Int abs_det = ns.det() < 0 ? -ns.det() : ns.det();
    const Int coeff_bound = std::max<Int>(5, static_cast<Int>(std::ceil(std::sqrt(static_cast<double>(abs_det)))) + 1);
    const Int transform_bound = 10;
    const BinaryGenusScan scan = binary_genus_scan(ns.det(), coeff_bound, transform_bound);
    genus.reps.clear();
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < scan.classes.size(); ++i) {
      const auto& c = scan.classes[i];
      if (c.signature == ns.signature() && fqf_isometric(c.form, q_ns)) {
        chosen.push_back(i);
        genus.reps.emplace_back(c.representative);
      }
    }
    if (genus.reps.empty()) throw CapExceededError("binary scan found no class in the genus of NS; raise the bounds");
    genus.certificate = "binary scan det " + std::to_string(ns.det()) + ", coefficients <= " +
                        std::to_string(coeff_bound) + ", transforms <= " + std::to_string(transform_bound) + ": " +
                        std::to_string(scan.classes.size()) + " classes, " + std::to_string(genus.reps.size()) +
                        " in the genus of NS";
    if (chosen.size() > 1)
      genus.certificate += " (classes in one genus may coincide beyond the transform bound)";
    if (!scan.caveat.empty()) report.certificates.push_back(scan.caveat);
    return genus;
  }

  if (ns.is_indefinite()) {
    const auto primes = factorize(ns.det() < 0 ? -ns.det() : ns.det());
    if (primes.size() == 1 && p_analysis(ns, primes[0].first).is_p_elementary) {
      genus.certificate = "NS is " + std::to_string(primes[0].first) + "-elementary and indefinite";
      genus.citations = {kPElementary};
      return genus;
    }
  }
  throw PreconditionError("no genus completeness certificate for NS = " + ns.expression() +
                          "; supply the genus representatives");
}

RepresentativeCount count_representative(const Lattice& l, const Lattice& t, const GHodgeSpec& g,
                                          FmCountReport& report) {
  RepresentativeCount rc{.lattice = l, .count = 0, .method = "", .ambient_order = 0, .left_order = 0,
                         .right_order = 0};
  if (l.is_indefinite()) {
    try {
      if (nikulin_check(l).conclusion) {
        rc.count = 1;
        rc.method = "nikulin";
        return rc;
      }
    } catch (const CapExceededError&) {
    }
  }
  const SurjectivityReport surj = is_surjective_on_discriminant(l);
  if (surj.verdict == Verdict::surjective) {
    rc.count = 1;
    rc.method = "surjective";
    rc.ambient_order = rc.left_order = surj.target_order;
    report.certificates.push_back("O(" + l.expression() + ") -> O(q) surjective: " + surj.reason);
    return rc;
  }
  const FiniteQuadraticForm q_l = discriminant_form(l);
  if (surj.verdict == Verdict::inconclusive) {
    // Re-raise the underlying cap or unsupported-class error when there is one.
    (void)fqf_automorphisms(q_l);
    (void)lattice_isometries(l);
    throw CapExceededError("double cosets for " + l.expression() + " not determined: " + surj.reason);
  }
  const FqfAutomorphismGroup ambient = fqf_automorphisms(q_l);
  const InducedAction induced = induced_on_discriminant(l, lattice_isometries(l));
  const FqfAutomorphismGroup left = generate_group(q_l.orders(), induced.image.elements);
  const FqfAutomorphismGroup right = ghodge_image(g, t, q_l);
  rc.count = static_cast<Int>(double_coset_count(ambient, left, right));
  rc.method = "double-cosets";
  rc.ambient_order = ambient.order();
  rc.left_order = left.order();
  rc.right_order = right.order();
  report.certificates.push_back("|O(" + l.expression() + ") \\ O(q) / G_Hodge| = " + std::to_string(rc.count) +
                                " with |O(q)| = " + std::to_string(rc.ambient_order) + ", image " +
                                std::to_string(rc.left_order) + ", G_Hodge image " + std::to_string(rc.right_order));
  return rc;
}

FmCountReport fm_count(const std::string& surface, const Lattice& ns, const Lattice& t, const GHodgeSpec& g,
                       const std::vector<Lattice>& explicit_reps) {
  const bool k3 = surface == "k3";
  FmCountReport report{surface, ns, t, g.describe(), {}, {}, {}, {}, {}, 0, {}, {}, {}};
  validate_pair(ns, t, k3 ? 22 : 6, 3, report);
  validate_ghodge(g, t);

  Genus genus = determine_genus(ns, explicit_reps, report);
  report.genus_certificate = genus.certificate;
  report.genus_reps = genus.reps;
  report.shortcut = genus.shortcut;
  for (const auto& l : genus.reps) {
    RepresentativeCount rc = genus.shortcut.empty()
                                 ? count_representative(l, t, g, report)
                                 : RepresentativeCount{.lattice = l, .count = 1, .method = genus.shortcut};
    report.per_rep_count.push_back(rc.count);
    report.total = checked_add(report.total, rc.count);
    report.details.push_back(std::move(rc));
  }
  if (report.shortcut.empty()) {
    bool all_surjective = std::all_of(report.details.begin(), report.details.end(),
                                      [](const auto& d) { return d.method != "double-cosets"; });
    if (all_surjective) report.shortcut = "surjective";
  }
  if (std::any_of(report.details.begin(), report.details.end(), [](const auto& d) { return d.method == "nikulin"; }) &&
      genus.shortcut.empty())
    genus.citations.push_back(kNikulinGenus);

  report.citations.push_back(k3 ? kHloyK3 : kHloyAbelian);
  for (auto& c : genus.citations) report.citations.push_back(std::move(c));
  if (k3)
    report.interpretation = "K3 partner count: " + std::to_string(report.total) +
                            " surface(s) up to isomorphism with equivalent derived category, X included";
  else
    report.interpretation = "abelian P^eq class count: " + std::to_string(report.total) +
                            " class(es), each class = {B, B^}" +
                            (report.total == 1 ? "; every partner of A is A or its dual" : "");
  return report;
}

}  // namespace

FmCountReport fm_count_k3(const Lattice& ns, const Lattice& transcendental, const GHodgeSpec& g,
                          const std::vector<Lattice>& genus_reps) {
  return fm_count("k3", ns, transcendental, g, genus_reps);
}

FmCountReport fm_count_abelian(const Lattice& ns, const Lattice& transcendental, const GHodgeSpec& g,
                               const std::vector<Lattice>& genus_reps) {
  return fm_count("abelian", ns, transcendental, g, genus_reps);
}

TwistedCheck twisted_partner_check(const Lattice& transcendental) {
  if (!transcendental.is_even()) throw PreconditionError("twisted check needs an even transcendental lattice");
  const FiniteQuadraticForm form = discriminant_form(transcendental);
  TwistedCheck out;
  out.order2_count = order_d_element_count(form, 2);
  out.hodge_bound = totient_order_bound(static_cast<Int>(transcendental.rank()));
  out.partner_exists = out.order2_count > out.hodge_bound;
  out.argument = "existence via lower bound: |I^2(A_T)| = " + std::to_string(out.order2_count) +
                 (out.partner_exists ? " > " : " <= ") + std::to_string(out.hodge_bound) +
                 " >= |O_Hodge(T)|, so the O_Hodge-orbits on I^2 " +
                 (out.partner_exists ? "number at least 2" : "are not forced to be several") +
                 "; valid for order d = 2 when NS is 2-elementary";
  out.citations = {kMaTwisted, kHodgeCyclic};
  return out;
}

std::size_t half_det_prime_count(Int det) {
  if (det == 0 || det % 2 != 0) throw PreconditionError("half_det_prime_count needs an even nonzero determinant");
  const Int half = (det < 0 ? -det : det) / 2;
  return half == 1 ? 0 : factorize(half).size();
}

}  // namespace fmlat
