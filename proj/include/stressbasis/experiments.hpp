#pragma once

#include "stressbasis/basis.hpp"
#include "stressbasis/oracles.hpp"
#include "stressbasis/particular.hpp"
#include "stressbasis/solvers.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sb {

using Json = nlohmann::ordered_json;

/// Thrown for malformed configs and unknown presets (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// \brief Declarative description of one experiment (JSON document, see docs/config.schema.json).
struct ExperimentConfig {
    Json doc;  // validated document with defaults filled in

    std::string name() const { return doc.at("name").get<std::string>(); }
    /// Parses and validates; applies the "full" overrides when full = true.
    static ExperimentConfig from_json(const Json& j, bool full = false);
};

std::vector<std::string> preset_names();
/// Embedded preset document (unvalidated text form, as `preset dump` prints it).
Json preset_json(const std::string& name);
ExperimentConfig preset(const std::string& name, bool full = false);
std::string list_presets(bool plain);

/// Least-squares slope of log E against log N over lo <= N <= hi.
double fit_slope(const std::vector<std::pair<int, double>>& series, int lo, int hi);

struct CheckResult {
    std::string name;
    std::string principle;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct PrincipleResult {
    Principle principle = Principle::SE;
    Approximation approx;
    std::optional<double> slope;
};

struct ExperimentReport {
    std::string name;
    bool full = false;
    Provenance provenance;
    std::string mesh_hash;
    BasisReport basis_report;
    std::optional<OracleSolution> oracle;
    double reference_energy = 0.0;
    std::pair<int, int> slope_window{0, 0};
    std::vector<PrincipleResult> results;
    std::vector<CheckResult> checks;
    Json extra = Json::object();

    bool pass() const;
    Json to_json() const;
};

/// Builds the mesh, basis (cached under SB_CACHE_DIR when set), particular stress, oracle and
/// approximations, evaluates the preset's checks, and writes outputs into out_dir when non-empty.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir = "");

/// Mesh, particular stress and reference for a config, without solving.
struct ExperimentSetup {
    MeshPtr mesh;
    Material material;
    ParticularStress particular;
    std::optional<OracleSolution> oracle;
};
ExperimentSetup prepare_setup(const ExperimentConfig& cfg, bool with_oracle = true);
BasisSet build_or_load_basis(const ExperimentConfig& cfg, const MeshPtr& mesh);

/// Writes the oracle's nodal CSV (with provenance header) for a config; returns the text.
std::string oracle_csv(const ExperimentConfig& cfg);

/// Parses "rectangle:LxxLy" or "annulus:ra,rb".
Domain parse_domain(const std::string& s);

}  // namespace sb
