#include "fmlat/serialize.hpp"

#include <set>
#include <string>

#include "fmlat/errors.hpp"

namespace fmlat {

namespace {

template <class T>
Json array_of(const std::vector<T>& items) {
  Json out = Json::array();
  for (const auto& x : items) out.push_back(to_json(x));
  return out;
}

template <class T>
Json optional_json(const std::optional<T>& x) {
  return x ? to_json(*x) : Json(nullptr);
}

[[noreturn]] void manifest_error(std::size_t index, const std::string& what) {
  throw PreconditionError("manifest entry " + std::to_string(index) + ": " + what);
}

}  // namespace

Json to_json(const Rational& r) { return r.str(); }

Json to_json(const ComponentWitness& w) {
  return {{"kind", w.kind}, {"x", w.x}, {"y", w.y}, {"complement_order", w.complement_order}};
}

Json to_json(const OddPrimeCondition& c) {
  return {{"p", c.p}, {"rank", c.rank}, {"l_p", c.l_p}, {"holds", c.holds}};
}

Json to_json(const RepresentativeCount& r) {
  return {{"lattice", to_json(r.lattice)},
          {"expression", r.lattice.expression()},
          {"count", r.count},
          {"method", r.method},
          {"ambient_order", r.ambient_order},
          {"left_order", r.left_order},
          {"right_order", r.right_order}};
}

Json to_json(const CertificateStep& s) {
  return {{"kind", s.kind}, {"statement", s.statement}, {"citations", array_of(s.citations)}};
}

Json to_json(const Embedding& e) {
  return {{"ambient", e.ambient},
          {"description", e.description},
          {"generators", e.generators},
          {"ns", to_json(e.ns)},
          {"ns_expression", e.ns.expression()},
          {"transcendental", to_json(e.transcendental)}};
}

Json to_json(const IntMatrix& m) { return m.to_rows(); }

Json to_json(const Signature& s) {
  return {{"positive", s.positive}, {"negative", s.negative}, {"zero", s.zero}};
}

Json to_json(const Lattice& l) { return {{"gram", to_json(l.gram())}, {"labels", l.labels()}}; }

Json to_json(const BasicInvariants& inv) {
  return {{"rank", inv.rank},
          {"det", inv.det},
          {"signature", to_json(inv.signature)},
          {"even", inv.even},
          {"degenerate", inv.degenerate}};
}

Json to_json(const DiscriminantGroup& g) {
  Json lifts = Json::array();
  for (const auto& lift : g.generator_lifts()) lifts.push_back(array_of(lift));
  return {{"cyclic_orders", g.cyclic_orders()}, {"generator_lifts", lifts}};
}

Json to_json(const FiniteQuadraticForm& q) {
  Json qs = Json::array();
  Json bs = Json::array();
  for (std::size_t i = 0; i < q.num_generators(); ++i) {
    qs.push_back(to_json(q.q_generator(i)));
    Json row = Json::array();
    for (std::size_t j = 0; j < q.num_generators(); ++j) row.push_back(to_json(q.b_generator(i, j)));
    bs.push_back(row);
  }
  return {{"cyclic_orders", q.orders()}, {"q_values", qs}, {"b_values", bs}};
}

Json to_json(const GroupAutomorphism& a) {
  Json cols = Json::array();
  for (std::size_t i = 0; i < a.images().cols(); ++i) cols.push_back(a.images().col(i));
  return {{"source_orders", a.source_orders()}, {"target_orders", a.orders()}, {"generator_images", cols}};
}

Json to_json(const IsometrySet& s) {
  return {{"gram", to_json(s.gram)},
          {"order", s.elements.size()},
          {"elements", array_of(s.elements)},
          {"complete", s.complete},
          {"bound", s.bound},
          {"certificate", s.certificate}};
}

Json to_json(const SurjectivityReport& r) {
  Json pre = Json::array();
  for (const auto& [image, lift] : r.preimages)
    pre.push_back({{"automorphism", to_json(image)}, {"isometry", to_json(lift)}});
  return {{"verdict", to_string(r.verdict)},
          {"target_order", r.target_order},
          {"image_order", r.image_order},
          {"isometries_complete", r.isometries_complete},
          {"preimages", pre},
          {"reason", r.reason}};
}

Json to_json(const BinaryGenusScan& scan) {
  Json classes = Json::array();
  for (const auto& c : scan.classes)
    classes.push_back({{"representative", to_json(c.representative)},
                       {"members", c.members.size()},
                       {"signature", to_json(c.signature)},
                       {"discriminant_form", to_json(c.form)},
                       {"gauss_milgram", c.gauss_milgram},
                       {"same_genus_as", c.same_genus_as}});
  return {{"det", scan.det},
          {"coeff_bound", scan.coeff_bound},
          {"transform_bound", scan.transform_bound},
          {"candidates", scan.candidates},
          {"class_count", scan.classes.size()},
          {"classes", classes},
          {"caveat", scan.caveat}};
}

Json to_json(const Citation& c) { return {{"statement", c.statement}, {"paper_location", c.paper_location}}; }

Json to_json(const NikulinReport& r) {
  const auto& b = r.condition_b;
  return {{"lattice", to_json(r.lattice)},
          {"expression", r.lattice.expression()},
          {"condition_a", array_of(r.condition_a)},
          {"condition_a_holds", r.condition_a_holds()},
          {"condition_b",
           {{"l_2", b.l_2}, {"applicable", b.applicable}, {"holds", b.holds}, {"witness", optional_json(b.witness)}}},
          {"conclusion", r.conclusion},
          {"citations", Json::array({to_json(r.citation)})}};
}

Json to_json(const FmCountReport& r) {
  return {{"surface", r.surface},
          {"ns", to_json(r.ns)},
          {"ns_expression", r.ns.expression()},
          {"transcendental", to_json(r.transcendental)},
          {"transcendental_expression", r.transcendental.expression()},
          {"ghodge", r.ghodge},
          {"genus_certificate", r.genus_certificate},
          {"shortcut", r.shortcut},
          {"genus_reps", array_of(r.genus_reps)},
          {"per_rep_count", r.per_rep_count},
          {"details", array_of(r.details)},
          {"total", r.total},
          {"interpretation", r.interpretation},
          {"certificates", r.certificates},
          {"citations", array_of(r.citations)}};
}

Json to_json(const TwistedCheck& t) {
  return {{"order2_count", t.order2_count},
          {"hodge_bound", t.hodge_bound},
          {"partner_exists", t.partner_exists},
          {"argument", t.argument},
          {"citations", array_of(t.citations)}};
}

Json to_json(const ScenarioReport& r) {
  // Every citation in the chain, once, in first-seen order.
  Json citations = Json::array();
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& step : r.chain)
    for (const auto& c : step.citations)
      if (seen.insert({c.statement, c.paper_location}).second) citations.push_back(to_json(c));
  return {{"scenario_id", r.scenario_id},
          {"params", r.params},
          {"surface", r.surface},
          {"embedding", optional_json(r.embedding)},
          {"chain", array_of(r.chain)},
          {"conclusion", {{"partner_count_bound", r.partner_count_bound}, {"partner_set", r.partner_set}}},
          {"count", optional_json(r.count)},
          {"nikulin_transcendental", optional_json(r.nikulin_transcendental)},
          {"twisted", optional_json(r.twisted)},
          {"notes", r.notes},
          {"citations", citations}};
}

Json to_json(const BatchEntry& e) {
  Json out{{"index", e.index}, {"id", e.id}, {"ok", e.report.has_value()}};
  if (e.report) {
    out["report"] = to_json(*e.report);
  } else {
    out["error"] = e.error;
    out["error_kind"] = e.error_kind;
  }
  return out;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<ScenarioRequest> parse_manifest(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw PreconditionError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw PreconditionError("manifest must be a JSON array");
  std::vector<ScenarioRequest> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& entry = doc[i];
    if (!entry.is_object()) manifest_error(i, "expected an object");
    for (const auto& [key, value] : entry.items())
      if (key != "id" && key != "params") manifest_error(i, "unexpected key \"" + key + "\"");
    if (!entry.contains("id") || !entry["id"].is_string()) manifest_error(i, "\"id\" must be a string");
    ScenarioRequest req{entry["id"].get<std::string>(), {}};
    if (entry.contains("params")) {
      const Json& params = entry["params"];
      if (!params.is_object()) manifest_error(i, "\"params\" must be an object");
      for (const auto& [key, value] : params.items()) {
        if (!value.is_number_integer()) manifest_error(i, "parameter \"" + key + "\" must be an integer");
        req.params[key] = value.get<Int>();
      }
    }
    out.push_back(std::move(req));
  }
  return out;
}

}  // namespace fmlat
