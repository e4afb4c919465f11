#pragma once

#include "shadowflow/coefficients.hpp"
#include "shadowflow/curvature_field.hpp"
#include "shadowflow/diagnostics.hpp"
#include "shadowflow/integrator.hpp"
#include "shadowflow/interaction_kernel.hpp"
#include "shadowflow/modification.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace shadowflow {

struct FieldConfig {
    int n = 5;
    double chart_radius = 1.0;
    std::vector<Bump> bumps;
};

struct KernelConfig {
    double h0 = 0.5;
    std::vector<MassBump> mass_table;
};

struct IntegratorConfig {
    double tol = 1e-8;
    double t_end = 0.0;  // 0: chosen by the scenario
    double wall_budget_s = 60.0;
    std::size_t max_steps = 20'000'000;
    PerturbationModel pert;
};

struct BubbleInit {
    double lambda = 1.0;
    Vec a;
    double omega = 1.0;
};

struct ScenarioConfig {
    std::string name = "divergence";
    double eps0 = 0.05;
    double lambda0 = 1e4;
    double a0 = 0.05;  // |a0| along the first axis when no bubble list is given
    std::vector<BubbleInit> bubbles;
    double omega_amplitude = 1.0;
    AlphaMode alpha_mode = AlphaMode::slaved;
    bool modified = false;
    double growth_target = 10.0;        // divergence stops at growth_target * lambda0
    double lambda_bound_factor = 1e3;   // "bounded" means no crossing of this multiple of lambda0
    double lambda_min_factor = 1e-2;    // runs with shrinking scales stop here
    double C = 10.0;
    double theta_eps = 5e-4;
    std::uint64_t seed = 0;
};

struct RunConfig {
    FieldConfig field;
    KernelConfig kernel;
    CoefficientOverrides coefficients;
    ModificationConfig modification;
    IntegratorConfig integrator;
    ScenarioConfig scenario;

    DiagnosticsConfig diagnostics() const { return {scenario.C, scenario.theta_eps}; }
};

const std::vector<std::string>& scenario_names();

// Calibrated defaults for a named scenario (divergence, compactified, mixed,
// off_max, tower).
RunConfig default_config(const std::string& scenario);

// Defaults of `scenario` overlaid with the YAML document.
RunConfig parse_config(const std::string& yaml_text, const std::string& scenario);
RunConfig load_config(const std::string& path, const std::string& scenario);

nlohmann::json to_json(const RunConfig& c);

// Set a numeric parameter addressed as section.key (used by sweeps).
void set_parameter(RunConfig& c, const std::string& key, double value);

}  // namespace shadowflow
