#pragma once

#include "shadowflow/interaction_kernel.hpp"
#include "shadowflow/modification.hpp"
#include "shadowflow/scenarios.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace shadowflow {

enum class BatteryOutcome { ok, violated, hypothesis_unmet };
std::string to_string(BatteryOutcome o);

struct BatteryResult {
    BatteryOutcome outcome = BatteryOutcome::ok;
    double measured = 0.0;  // achieved constant (ratio of the two sides)
    std::string reason;     // unmet hypothesis, when any
};

// Interaction smallness below which the leading-order inequalities are asserted.
inline constexpr double kBatteryEpsMax = 0.1;

// -sum_{i!=j} C^i (alpha_j/alpha_i) lambda_i d_lambda_i eps_ij >= c sum_{i>j} C^i eps_ij.
// Requires lambda ascending, alpha ratios in [1/2, 2] and all eps_ij <= kBatteryEpsMax.
BatteryResult check_eij_large(const BubbleState& s, const GreenKernel& kernel, double C, double c_required = 0.1);

// sum_{i!=j} (C^i/lambda_i)|grad_{a_i} eps_ij| <= C' sum_{i>j} C^j eps_ij,
// C' = (n-2)/2 G (1 + C^(p-1)). Requires lambda ascending. measured is (lhs/rhs)/C'.
BatteryResult check_eij_small(const BubbleState& s, const GreenKernel& kernel, double C, double G);
double eij_small_constant(int n, int p, double C, double G);

// sup |grad g| / sqrt(g) over separations in (0, max_distance].
double kernel_gradient_ratio_sup(const GreenKernel& kernel, double max_distance);

// For i > j with vartheta_i > 0: -lambda_i d_lambda_i eps_ij >= (n-2)/4 eps_ij.
// Requires lambda and lambda|a|^5 ascending together and all eps_ij <= kBatteryEpsMax.
BatteryResult check_perturbed_pairwise(const BubbleState& s, const GreenKernel& kernel, const ModificationConfig& m,
                                       double theta_eps);
// -sum_{i!=j} C^i vartheta_i (alpha_j/alpha_i) lambda_i d_lambda_i eps_ij >= c sum_{i!=j} C^i vartheta_i eps_ij.
BatteryResult check_perturbed_summed(const BubbleState& s, const GreenKernel& kernel, const ModificationConfig& m,
                                     double theta_eps, double C, double c_required = 0.05);

// p in [2, 6], lambda log-uniform in [10, 1e6] sorted ascending, alpha ratios in
// [1/2, 2]; centers uniform in the ball for even draws, log-uniform radius in
// [1e-3, radius] otherwise.
BubbleState random_battery_state(std::mt19937_64& rng, int n, double radius);
// Same scales and amplitudes with centers reassigned so lambda|a|^5 ascends.
BubbleState align_centers_with_scales(const BubbleState& s);

struct BatteryOptions {
    int n = 5;
    double h0 = 0.5;
    double chart_radius = 1.0;
    std::vector<double> C_values{10.0, 100.0};
    double theta_eps = 1e-3;
    double kappa_star_max = 2.0;
};

ScenarioReport verify_batteries(std::uint64_t seed, int trials, const BatteryOptions& opt = {});

}  // namespace shadowflow
