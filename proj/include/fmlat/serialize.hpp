#pragma once

// JSON forms of the library's values. Objects use nlohmann::json, whose keys
// are kept sorted, so dump() output is canonical. Rationals are written as
// exact fraction strings ("1/3").

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fmlat/counting.hpp"
#include "fmlat/discriminant.hpp"
#include "fmlat/fqf.hpp"
#include "fmlat/isometry.hpp"
#include "fmlat/lattice.hpp"
#include "fmlat/scenario.hpp"

namespace fmlat {

using Json = nlohmann::json;

Json to_json(const Rational& r);
Json to_json(const IntMatrix& m);
Json to_json(const Signature& s);
/// {"gram": [[...]], "labels": [...]}
Json to_json(const Lattice& l);
Json to_json(const BasicInvariants& inv);
Json to_json(const DiscriminantGroup& g);
/// {"cyclic_orders", "q_values", "b_values"} on the fixed generators.
Json to_json(const FiniteQuadraticForm& q);
/// Column i is the image of generator i.
Json to_json(const GroupAutomorphism& a);
Json to_json(const ComponentWitness& w);
Json to_json(const IsometrySet& s);
Json to_json(const SurjectivityReport& r);
Json to_json(const BinaryGenusScan& scan);
Json to_json(const Citation& c);
Json to_json(const OddPrimeCondition& c);
Json to_json(const NikulinReport& r);
Json to_json(const RepresentativeCount& r);
Json to_json(const FmCountReport& r);
Json to_json(const TwistedCheck& t);
Json to_json(const CertificateStep& s);
Json to_json(const Embedding& e);
Json to_json(const ScenarioReport& r);
Json to_json(const BatchEntry& e);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const Json& j);

/// A JSON array of {"id": string, "params": {name: integer}}; "params" may be
/// omitted. Throws PreconditionError naming the entry index on malformed input.
std::vector<ScenarioRequest> parse_manifest(std::string_view text);

}  // namespace fmlat
