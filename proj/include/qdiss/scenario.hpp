// scenario.hpp — Declarative scenario files: parsing, validation and assembly
//
// A scenario is a JSON document with the blocks "system", "bath",
// "initial_state", "integrator" and "output" plus a "units" flag; see
// docs/scenario_schema.md for the full schema. Validation collects every
// problem it finds instead of stopping at the first one.

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdiss/comparator.hpp"
#include "qdiss/generic_dynamics.hpp"
#include "qdiss/integrator.hpp"

namespace qdiss {

struct Diagnostic {
    std::string field;    // dotted path, e.g. "bath.zeta"; empty for document-level problems
    std::string message;
    int line = 0;         // 1-based; 0 when not tied to a source position
    int column = 0;

    std::string str() const;
};

// The scenario is malformed; carries every diagnostic found.
class ScenarioInvalid : public std::runtime_error {
public:
    explicit ScenarioInvalid(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

// A scenario or a file it references could not be read.
class ScenarioIOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelKind { two_level, particle };

struct Scenario {
    std::string id;
    ModelKind model = ModelKind::two_level;
    SystemSpec spec;
    CoupledState initial;
    IntegratorConfig config;
    std::vector<NamedObservable> observables;
    std::vector<CorrelationPair> correlations;
    std::optional<double> rate_hint;  // gamma for the two-level model, gamma = zeta / 2m for the particle
    double agreement_tol = 1e-6;
};

// Reads and parses a JSON document. Throws ScenarioIOError if unreadable and
// ScenarioInvalid (with line and column) on a syntax error.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Diagnostics for a parsed document; relative file references resolve
// against base_dir. Empty means valid. If out is given and the document is
// valid, it receives the assembled scenario.
std::vector<Diagnostic> validate_scenario(const nlohmann::json& doc,
                                          const std::filesystem::path& base_dir,
                                          std::optional<Scenario>* out = nullptr);

// read_json_file + validate_scenario; throws ScenarioInvalid on diagnostics.
Scenario load_scenario(const std::filesystem::path& path);
Scenario build_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);

// Names of the observables a model offers to "output.observables".
std::vector<std::string> available_observables(ModelKind model);

// Sets doc at a dotted path ("bath.entropy_curve.temperature", "initial_state.populations.0"),
// creating intermediate objects. Throws ScenarioInvalid if the path crosses a non-container.
void set_dotted(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);

} // namespace qdiss
