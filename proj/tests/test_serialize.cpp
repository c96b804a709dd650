#include "doctest.h"

#include <string>

#include "fmlat/discriminant.hpp"
#include "fmlat/errors.hpp"
#include "fmlat/serialize.hpp"

using namespace fmlat;

TEST_CASE("lattices and forms serialize with exact fractions") {
  const Lattice u3 = Lattice::hyperbolic(3);
  const Json l = to_json(u3);
  CHECK(l.at("gram") == Json::parse("[[0,3],[3,0]]"));
  CHECK(l.contains("labels"));

  const Json q = to_json(discriminant_form(parse_lattice_expr("<-6>")));
  CHECK(q.at("cyclic_orders") == Json::parse("[6]"));
  CHECK(q.at("q_values") == Json::parse(R"(["11/6"])"));  // -1/6 mod 2
  CHECK(q.at("b_values") == Json::parse(R"([["5/6"]])"));

  const Json g = to_json(discriminant_group(u3));
  CHECK(g.at("cyclic_orders") == Json::parse("[3,3]"));
  for (const auto& lift : g.at("generator_lifts"))
    for (const auto& v : lift) CHECK(v.is_string());
}

TEST_CASE("canonical dumps have sorted keys and are stable") {
  const Json j{{"zeta", 1}, {"alpha", Json{{"b", 2}, {"a", 1}}}};
  const std::string text = canonical_dump(j);
  CHECK(text.find("\"alpha\"") < text.find("\"zeta\""));
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(text.back() == '\n');

  const std::string first = canonical_dump(to_json(run_scenario("bielliptic-2-rho2")));
  const std::string second = canonical_dump(to_json(run_scenario("bielliptic-2-rho2")));
  CHECK(first == second);
}

TEST_CASE("reports carry citation arrays") {
  const Json count = to_json(fm_count_abelian(Lattice::hyperbolic(2), parse_lattice_expr("U+U(2)")));
  REQUIRE(count.at("citations").is_array());
  REQUIRE_FALSE(count.at("citations").empty());
  for (const auto& c : count.at("citations")) {
    CHECK(c.at("statement").is_string());
    CHECK(c.at("paper_location").is_string());
  }
  CHECK(count.at("total") == 1);

  const Json scenario = to_json(run_scenario("enriques-FN", {{"N", 4}}));
  CHECK(scenario.at("conclusion").at("partner_count_bound") == "=1");
  CHECK(scenario.at("params") == Json::parse(R"({"N": 4})"));
  CHECK_FALSE(scenario.at("citations").empty());
  for (const auto& step : scenario.at("chain"))
    CHECK((step.at("kind") == "computation" || !step.at("citations").empty()));

  const Json nikulin = to_json(nikulin_check(Lattice::hyperbolic(3)));
  CHECK(nikulin.at("conclusion") == false);
  CHECK(nikulin.at("condition_a").at(0).at("p") == 3);
  CHECK(nikulin.at("citations").size() == 1);
}

TEST_CASE("batch entries serialize reports or errors") {
  const auto out = run_batch({{"bielliptic-1", {}}, {"missing", {}}});
  const Json ok = to_json(out[0]);
  CHECK(ok.at("ok") == true);
  CHECK(ok.contains("report"));
  CHECK_FALSE(ok.contains("error"));
  const Json bad = to_json(out[1]);
  CHECK(bad.at("ok") == false);
  CHECK(bad.at("error_kind") == "precondition");
  CHECK(bad.at("index") == 1);
}

TEST_CASE("manifest parsing") {
  CHECK(parse_manifest("[]").empty());

  const auto reqs = parse_manifest(R"([{"id": "enriques-FN", "params": {"N": 3}}, {"id": "bielliptic-1"}])");
  REQUIRE(reqs.size() == 2);
  CHECK(reqs[0].id == "enriques-FN");
  CHECK(reqs[0].params.at("N") == 3);
  CHECK(reqs[1].params.empty());

  auto message_of = [](const char* text) -> std::string {
    try {
      parse_manifest(text);
    } catch (const PreconditionError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message_of("{").find("not valid JSON") != std::string::npos);
  CHECK(message_of(R"({"id": "x"})").find("array") != std::string::npos);
  CHECK(message_of(R"([{"id": "a"}, 7])").find("entry 1") != std::string::npos);
  CHECK(message_of(R"([{"id": "a"}, {"id": "b"}, {"params": {}}])").find("entry 2") != std::string::npos);
  CHECK(message_of(R"([{"id": "a", "params": {"N": 2.5}}])").find("entry 0") != std::string::npos);
  CHECK(message_of(R"([{"id": "a", "extra": 1}])").find("unexpected key") != std::string::npos);
}
