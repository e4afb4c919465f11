#pragma once

#include "shadowflow/coefficients.hpp"
#include "shadowflow/curvature_field.hpp"
#include "shadowflow/interaction_kernel.hpp"

#include <vector>

namespace shadowflow {

struct BubbleRate {
    double dlog_alpha = 0.0;
    double dlog_lambda = 0.0;
    Vec da;
};

struct StateDerivative {
    std::vector<BubbleRate> rates;
};

struct BubbleSigma {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    Vec sigma3;
};

struct SigmaTriple {
    std::vector<BubbleSigma> per_bubble;
};

enum class AlphaMode { slaved, dynamic };

// Leading-order testings of the flow against the tangent directions, using the
// amplitudes stored in the state.
SigmaTriple sigma_leading(const BubbleState& state, const CurvatureField& field, const GreenKernel& kernel,
                          const CoefficientSet& coeffs);

// alpha_i solving kappa * alpha^{4/(n-2)} * K(a_i) = 4n(n-1).
std::vector<double> equilibrium_alpha(const BubbleState& state, const CurvatureField& field,
                                      const CoefficientSet& coeffs);

// Shadow flow without weak limit. Slaved mode evaluates with equilibrium
// amplitudes and returns dlog_alpha = 0; dynamic mode inverts the sigma testings.
StateDerivative rhs_zero_weak_limit(const BubbleState& state, const CurvatureField& field,
                                    const GreenKernel& kernel, const CoefficientSet& coeffs,
                                    AlphaMode alpha_mode = AlphaMode::slaved);

StateDerivative rhs_positive_weak_limit(const BubbleState& state, const CurvatureField& field,
                                        const GreenKernel& kernel, const CoefficientSet& coeffs);

// Replace amplitudes by their equilibrium values.
void slave_alpha(BubbleState& state, const CurvatureField& field, const CoefficientSet& coeffs);

}  // namespace shadowflow
