#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmlat/counting.hpp"
#include "fmlat/lattice.hpp"

namespace fmlat {

using ScenarioParams = std::map<std::string, Int>;

/// One link of a scenario's certificate chain. Every step carries either a
/// computation (kind "computation") or at least one literature citation
/// (kind "citation").
struct CertificateStep {
  std::string kind;
  std::string statement;
  std::vector<Citation> citations;
};

/// A primitive sublattice NS of a unimodular ambient lattice, with T = NS^⊥.
struct Embedding {
  std::string ambient;  // "Lambda" or "U+U+U"
  std::string description;
  std::vector<std::vector<Int>> generators;  // ambient coordinates, one per NS basis vector
  Lattice ns;
  Lattice transcendental;
};

struct ScenarioReport {
  std::string scenario_id;
  ScenarioParams params;
  std::string surface;  // "k3" or "abelian"
  std::optional<Embedding> embedding;
  std::vector<CertificateStep> chain;
  std::string partner_count_bound;  // "=1" or "≤2"
  std::string partner_set;
  std::optional<FmCountReport> count;
  std::optional<NikulinReport> nikulin_transcendental;
  std::optional<TwistedCheck> twisted;
  std::vector<std::string> notes;
};

/// enriques-generic, enriques-FN, enriques-GM, k3-rank-ge-12, bielliptic-1,
/// bielliptic-2-rho2, bielliptic-34-rho2, bielliptic-3-rho3,
/// twisted-enriques-generic.
const std::vector<std::string>& scenario_ids();

/// Parameters: N for enriques-FN (N >= 2), bielliptic-1 (optional, N >= 1)
/// and bielliptic-3-rho3 (N >= 1); M for enriques-GM (M >= 1); rho for
/// k3-rank-ge-12 (12..20). Unknown ids or parameters throw PreconditionError.
ScenarioReport run_scenario(const std::string& id, const ScenarioParams& params = {});

/// Embeds NS (generators given in ambient coordinates) and returns the
/// complement. Checks that the induced form equals `expected` and that the
/// embedding is primitive.
Embedding embed(const Lattice& ambient, std::string ambient_name, std::vector<std::vector<Int>> generators,
                const Lattice& expected, std::string description);

struct ScenarioRequest {
  std::string id;
  ScenarioParams params;
};

struct BatchEntry {
  std::size_t index = 0;
  std::string id;
  std::optional<ScenarioReport> report;
  std::string error;       // empty on success
  std::string error_kind;  // "precondition", "cap", "unsupported", "overflow", "error"
};

/// Runs the requests concurrently; entries come back in request order and a
/// failing entry does not affect the others.
std::vector<BatchEntry> run_batch(const std::vector<ScenarioRequest>& requests);

}  // namespace fmlat
