#include "fmlat/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "CLI11.hpp"

#include "fmlat/counting.hpp"
#include "fmlat/discriminant.hpp"
#include "fmlat/errors.hpp"
#include "fmlat/isometry.hpp"
#include "fmlat/lattice.hpp"
#include "fmlat/scenario.hpp"
#include "fmlat/serialize.hpp"

namespace fmlat::cli {

namespace {

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string signature_text(const Signature& s) {
  std::string t = "(" + std::to_string(s.positive) + ", " + std::to_string(s.negative) + ")";
  if (s.zero != 0) t += " nullity " + std::to_string(s.zero);
  return t;
}

std::string group_text(const std::vector<Int>& orders) {
  if (orders.empty()) return "0";
  std::string t;
  for (std::size_t i = 0; i < orders.size(); ++i) t += (i ? " + Z/" : "Z/") + std::to_string(orders[i]);
  return t;
}

std::string matrix_text(const IntMatrix& m) { return Json(m.to_rows()).dump(); }

void print_citations(std::ostream& out, const std::vector<Citation>& citations, const std::string& indent) {
  for (const auto& c : citations) out << indent << "- " << c.statement << " [" << c.paper_location << "]\n";
}

void print_count(std::ostream& out, const FmCountReport& r) {
  out << "surface            " << r.surface << "\n"
      << "NS                 " << r.ns.expression() << "\n"
      << "T                  " << r.transcendental.expression() << "\n"
      << "G_Hodge image      " << r.ghodge << "\n"
      << "genus              " << r.genus_certificate << "\n"
      << "shortcut           " << (r.shortcut.empty() ? "none" : r.shortcut) << "\n";
  for (const auto& d : r.details) {
    out << "  " << d.lattice.expression() << ": " << d.count << " via " << d.method;
    if (d.right_order != 0)
      out << " (|O(q)| = " << d.ambient_order << ", image of O(L) " << d.left_order << ", G_Hodge image "
          << d.right_order << ")";
    else if (d.ambient_order != 0)
      out << " (|O(q)| = " << d.ambient_order << ", image of O(L) " << d.left_order << ")";
    out << "\n";
  }
  out << "total              " << r.total << "\n"
      << "interpretation     " << r.interpretation << "\n";
  if (!r.certificates.empty()) {
    out << "certificates\n";
    for (const auto& c : r.certificates) out << "  - " << c << "\n";
  }
  out << "citations\n";
  print_citations(out, r.citations, "  ");
}

void print_nikulin(std::ostream& out, const NikulinReport& r) {
  out << "lattice            " << r.lattice.expression() << "\n";
  if (r.condition_a.empty()) out << "(a) no odd primes divide det\n";
  for (const auto& c : r.condition_a)
    out << "(a) p = " << c.p << ": rank " << c.rank << ", l_p " << c.l_p << " -> "
        << (c.holds ? "holds" : "fails") << "\n";
  const auto& b = r.condition_b;
  out << "(b) l_2 = " << b.l_2 << ": ";
  if (!b.applicable)
    out << "not applicable (rank > l_2)\n";
  else
    out << (b.holds ? "holds, splits off " + b.witness->kind : std::string("fails")) << "\n";
  out << "conclusion         "
      << (r.conclusion ? "unique in genus, O(T) -> O(q_T) surjective" : "criterion does not apply") << "\n"
      << "citation           " << r.citation.statement << " [" << r.citation.paper_location << "]\n";
}

void print_scenario(std::ostream& out, const ScenarioReport& r) {
  out << "scenario           " << r.scenario_id;
  for (const auto& [k, v] : r.params) out << " " << k << "=" << v;
  out << "\nsurface            " << r.surface << "\n";
  if (r.embedding)
    out << "NS                 " << r.embedding->ns.expression() << " in " << r.embedding->ambient << " ("
        << r.embedding->description << ")\n"
        << "T                  rank " << r.embedding->transcendental.rank() << ", det "
        << r.embedding->transcendental.det() << "\n";
  out << "partners           " << r.partner_count_bound << " " << r.partner_set << "\n"
      << "chain\n";
  for (const auto& step : r.chain) {
    out << "  [" << step.kind << "] " << step.statement << "\n";
    print_citations(out, step.citations, "      ");
  }
  if (!r.notes.empty()) {
    out << "notes\n";
    for (const auto& n : r.notes) out << "  - " << n << "\n";
  }
}

Int parse_int(const std::string& text, const std::string& what) {
  Int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw PreconditionError(what + " must be an integer, got \"" + text + "\"");
  return v;
}

ScenarioParams parse_params(const std::vector<std::string>& items) {
  ScenarioParams params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw PreconditionError("--param expects k=v, got \"" + item + "\"");
    const std::string key = item.substr(0, eq);
    if (params.count(key)) throw PreconditionError("parameter " + key + " given twice");
    params[key] = parse_int(item.substr(eq + 1), "parameter " + key);
  }
  return params;
}

int exit_code_for(const std::string& kind) {
  if (kind == "cap") return kInconclusive;
  if (kind == "error") return kFailure;
  return kPrecondition;
}

// Maps library exceptions onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const OverflowError& e) {
    err << "error: overflow: " << e.what() << "\n";
    return kPrecondition;
  } catch (const UnsupportedError& e) {
    err << "error: unsupported: " << e.what() << "\n";
    return kPrecondition;
  } catch (const CapExceededError& e) {
    err << "inconclusive: " << e.what() << "\n";
    return kInconclusive;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lattice computations for Fourier-Mukai partner counts", "fmlat"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print canonical JSON");

  std::function<int()> action;

  std::string lattice_expr;
  bool with_disc = false;
  bool with_aut = false;
  auto* lattice_cmd = app.add_subcommand("lattice", "Invariants of a lattice expression");
  lattice_cmd->add_option("expr", lattice_expr, "e.g. U(3), E8(-2)+<-4>")->required();
  lattice_cmd->add_flag("--disc", with_disc, "Discriminant group and form");
  lattice_cmd->add_flag("--aut", with_aut, "Isometry group and its action on the discriminant");
  lattice_cmd->add_flag("--json", json, "Print canonical JSON");
  lattice_cmd->callback([&] {
    action = [&] {
      const Lattice l = parse_lattice_expr(lattice_expr);
      const BasicInvariants inv = basic_invariants(l);
      Json j{{"expression", l.expression()}, {"lattice", to_json(l)}, {"invariants", to_json(inv)}};
      std::ostringstream text;
      text << "lattice            " << l.expression() << "\n"
           << "rank               " << inv.rank << "\n"
           << "det                " << inv.det << "\n"
           << "signature          " << signature_text(inv.signature) << "\n"
           << "even               " << yes_no(inv.even) << "\n";
      if (with_disc) {
        const DiscriminantGroup g = discriminant_group(l);
        const FiniteQuadraticForm q = discriminant_form(l);
        const int sigma = gauss_milgram_signature(q);
        j["discriminant_group"] = to_json(g);
        j["discriminant_form"] = to_json(q);
        j["gauss_milgram_signature"] = sigma;
        text << "A_L                " << group_text(g.cyclic_orders()) << "\n"
             << "q on generators   ";
        for (std::size_t i = 0; i < q.num_generators(); ++i) text << " " << q.q_generator(i);
        text << "\ngauss-milgram      " << sigma << " (signature index mod 8: "
             << ((inv.signature.index() % 8) + 8) % 8 << ")\n";
      }
      if (with_aut) {
        const IsometrySet iso = lattice_isometries(l);
        const SurjectivityReport s = is_surjective_on_discriminant(l);
        j["isometries"] = to_json(iso);
        j["surjectivity"] = to_json(s);
        text << "O(L)               " << iso.elements.size() << (iso.complete ? " (complete)" : " (partial)") << ", "
             << iso.certificate << "\n"
             << "O(L) -> O(q_L)     " << to_string(s.verdict) << ", |O(q_L)| = " << s.target_order
             << ", image order " << s.image_order << "\n";
        if (!s.reason.empty()) text << "                   " << s.reason << "\n";
      }
      out << (json ? canonical_dump(j) : text.str());
      return kOk;
    };
  });

  std::string nikulin_expr;
  auto* nikulin_cmd = app.add_subcommand("nikulin", "Nikulin's uniqueness and surjectivity criterion");
  nikulin_cmd->add_option("expr", nikulin_expr, "An even indefinite lattice")->required();
  nikulin_cmd->add_flag("--json", json, "Print canonical JSON");
  nikulin_cmd->callback([&] {
    action = [&] {
      const NikulinReport r = nikulin_check(parse_lattice_expr(nikulin_expr));
      if (json)
        out << canonical_dump(to_json(r));
      else
        print_nikulin(out, r);
      return kOk;
    };
  });

  Int scan_det = 0;
  Int scan_bound = 0;
  Int scan_transform = 10;
  auto* scan_cmd = app.add_subcommand("genus-scan", "Classes of even binary forms of a given determinant");
  scan_cmd->add_option("--det", scan_det, "Determinant")->required();
  scan_cmd->add_option("--bound", scan_bound, "Coefficient bound")->required();
  scan_cmd->add_option("--transform-bound", scan_transform, "Entry bound for equivalence transforms")
      ->capture_default_str();
  scan_cmd->add_flag("--json", json, "Print canonical JSON");
  scan_cmd->callback([&] {
    action = [&] {
      const BinaryGenusScan scan = binary_genus_scan(scan_det, scan_bound, scan_transform);
      if (json) {
        out << canonical_dump(to_json(scan));
        return kOk;
      }
      out << "det " << scan.det << ", coefficient bound " << scan.coeff_bound << ", transform bound "
          << scan.transform_bound << ": " << scan.candidates << " forms, " << scan.classes.size() << " classes\n";
      for (std::size_t i = 0; i < scan.classes.size(); ++i) {
        const auto& c = scan.classes[i];
        out << "  [" << i << "] " << matrix_text(c.representative) << " signature " << signature_text(c.signature)
            << ", A = " << group_text(c.form.orders()) << ", gauss-milgram " << c.gauss_milgram << ", "
            << c.members.size() << " forms";
        if (!c.same_genus_as.empty()) out << ", same genus as " << Json(c.same_genus_as).dump();
        out << "\n";
      }
      if (!scan.caveat.empty()) out << "caveat: " << scan.caveat << "\n";
      return kOk;
    };
  });

  std::string surface;
  std::string ns_expr;
  std::string t_expr;
  std::string ghodge = "plus_minus";
  std::vector<std::string> genus_exprs;
  auto* count_cmd = app.add_subcommand("count", "Count Fourier-Mukai partners from NS and T");
  count_cmd->add_option("surface", surface, "k3 or abelian")->required()->check(CLI::IsMember({"k3", "abelian"}));
  count_cmd->add_option("--ns", ns_expr, "Neron-Severi lattice")->required();
  count_cmd->add_option("--t", t_expr, "Transcendental lattice")->required();
  count_cmd->add_option("--ghodge", ghodge, "trivial, plus_minus or cyclic(m)")->capture_default_str();
  count_cmd->add_option("--genus", genus_exprs, "Genus representative of NS (repeatable)");
  count_cmd->add_flag("--json", json, "Print canonical JSON");
  count_cmd->callback([&] {
    action = [&] {
      const Lattice ns = parse_lattice_expr(ns_expr);
      const Lattice t = parse_lattice_expr(t_expr);
      std::vector<Lattice> reps;
      for (const auto& e : genus_exprs) reps.push_back(parse_lattice_expr(e));
      const GHodgeSpec g = GHodgeSpec::parse(ghodge);
      const FmCountReport r = surface == "k3" ? fm_count_k3(ns, t, g, reps) : fm_count_abelian(ns, t, g, reps);
      if (json)
        out << canonical_dump(to_json(r));
      else
        print_count(out, r);
      return kOk;
    };
  });

  std::string scenario_id;
  std::vector<std::string> param_items;
  auto* scenario_cmd = app.add_subcommand("scenario", "Run a named scenario");
  scenario_cmd->add_option("id", scenario_id, "Scenario id (see --list)");
  scenario_cmd->add_option("--param", param_items, "k=v (repeatable)");
  bool list_ids = false;
  scenario_cmd->add_flag("--list", list_ids, "List scenario ids");
  scenario_cmd->add_flag("--json", json, "Print canonical JSON");
  scenario_cmd->callback([&] {
    action = [&] {
      if (list_ids) {
        for (const auto& id : scenario_ids()) out << id << "\n";
        return kOk;
      }
      if (scenario_id.empty()) throw PreconditionError("scenario id required");
      const ScenarioReport r = run_scenario(scenario_id, parse_params(param_items));
      if (json)
        out << canonical_dump(to_json(r));
      else
        print_scenario(out, r);
      return kOk;
    };
  });

  std::string manifest_path;
  auto* batch_cmd = app.add_subcommand("batch", "Run a JSON manifest of scenarios");
  batch_cmd->add_option("file", manifest_path, "JSON array of {id, params}")->required();
  batch_cmd->add_flag("--json", json, "Print canonical JSON");
  batch_cmd->callback([&] {
    action = [&] {
      std::ifstream in(manifest_path);
      if (!in) throw PreconditionError("cannot read " + manifest_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const auto entries = run_batch(parse_manifest(buffer.str()));
      int code = kOk;
      Json j = Json::array();
      for (const auto& e : entries) {
        if (!e.report && code == kOk) code = exit_code_for(e.error_kind);
        if (json) {
          j.push_back(to_json(e));
          continue;
        }
        out << "[" << e.index << "] " << e.id;
        if (e.report)
          out << ": " << e.report->partner_count_bound << " " << e.report->partner_set << "\n";
        else
          out << ": " << e.error_kind << " error: " << e.error << "\n";
      }
      if (json) out << canonical_dump(j);
      return code;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kPrecondition;
  }
  return guarded(err, action);
}

}  // namespace fmlat::cli
