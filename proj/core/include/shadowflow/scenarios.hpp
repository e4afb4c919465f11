#pragma once

#include "shadowflow/config.hpp"
#include "shadowflow/integrator.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace shadowflow {

struct Check {
    std::string name;
    std::string anchor;  // the qualitative claim the check operationalises
    bool passed = false;
    bool informational = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct ScenarioReport {
    std::string scenario;
    nlohmann::json config;
    std::vector<Check> checks;
    nlohmann::json budgets = nlohmann::json::object();
    std::string termination;
    std::vector<std::string> trajectory_files;
    std::vector<std::string> notes;

    Check& add(Check c);
    const Check* find(const std::string& name) const;
    // True when every non-informational check passed.
    bool all_passed() const;
    // Fails when a check carries no anchor.
    bool self_validate() const;
    nlohmann::json to_json() const;
};

struct ScenarioResult {
    ScenarioReport report;
    std::vector<std::pair<std::string, Trajectory>> trajectories;
};

// Assembled model objects for a configuration.
struct Model {
    CurvatureField field;
    GreenKernel kernel;
    CoefficientSet coeffs;
    ModificationConfig modification;
    DiagnosticsConfig diagnostics;

    explicit Model(const RunConfig& c);
};

// State at t = 0 for the configured scenario, amplitudes at equilibrium.
BubbleState initial_state(const RunConfig& c, const Model& m);

// Flow system for the configuration: rhs chosen by weak-limit mode and the
// modified flag, amplitude slaving in slaved mode, full diagnostics.
FlowSystem make_system(const RunConfig& c, const Model& m);

ScenarioResult run_divergence(const RunConfig& c);
ScenarioResult run_compactified(const RunConfig& c);
// sub in {mixed, off_max, tower}
ScenarioResult run_exclusions(const RunConfig& c, const std::string& sub);
// Dispatch on c.scenario.name.
ScenarioResult run_scenario(const RunConfig& c);

}  // namespace shadowflow
