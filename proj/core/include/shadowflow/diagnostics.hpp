#pragma once

#include "shadowflow/modification.hpp"

#include <cstddef>
#include <vector>

namespace shadowflow {

struct DiagnosticSample {
    double t = 0.0;
    std::vector<double> lam_a2;    // lambda_i |a_i|^2
    std::vector<double> lam_a5;    // lambda_i |a_i|^5
    std::vector<double> mass_inv;  // -lambda_i lap K(a_i), NaN outside the divergence regime
    double theta = 0.0;
    double psi = 0.0;
    double energy = 0.0;
    std::vector<double> eps_pairs;  // eps_ij for i < j, row-major
};

// Sum of C^i eta(lambda_i|a_i|^5/eps) ln(lambda_i|a_i|^5/eps) with bubbles sorted
// ascending by lambda|a|^5.
double theta(const BubbleState& state, const ModificationConfig& m, double C, double eps);

// Sum of C^i ln(1/lambda_i) over the subset ordered by 1/lambda descending.
double psi(const BubbleState& state, double C, const std::vector<int>& subset);
double psi(const BubbleState& state, double C);

// -lambda_i lap K(a_i); DomainError when lap K(a_i) >= 0.
double mass_scale_invariant(const BubbleState& state, const CurvatureField& field, int i);

// 4n(n-1) c1^{2/n} (sum_i K(a_i)^{-(n-2)/2})^{2/n}
double energy_surrogate(const BubbleState& state, const CurvatureField& field, const CoefficientSet& coeffs);

struct DiagnosticsConfig {
    double C = 10.0;
    double theta_eps = 1e-3;
};

DiagnosticSample sample_diagnostics(double t, const BubbleState& state, const CurvatureField& field,
                                    const GreenKernel& kernel, const CoefficientSet& coeffs,
                                    const ModificationConfig& m, const DiagnosticsConfig& dc);

enum class Direction { nonincreasing, nondecreasing };

struct LyapunovVerdict {
    bool passed = true;
    double violation = 0.0;  // total wrong-direction movement
    double worst_step = 0.0;
    std::size_t worst_index = 0;
    double slack = 0.0;
};

LyapunovVerdict check_lyapunov(const std::vector<double>& series, Direction direction, double slack);

}  // namespace shadowflow
