#pragma once

#include "shadowflow/coefficients.hpp"
#include "shadowflow/curvature_field.hpp"
#include "shadowflow/scenarios.hpp"

#include <cstddef>
#include <cstdint>

namespace shadowflow {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    double relative_error() const { return value != 0.0 ? std::abs(std_error / value) : 0.0; }
};

// Samples per independently seeded batch.
inline constexpr std::size_t kMcBatch = 100'000;

// (lambda / (1 + lambda^2 |x-a|^2))^{(n-2)/2}, n = x.size()
double flat_bubble(const Vec& x, const Vec& a, double lambda);

// Importance-sampled estimate of a bubble constant.
McEstimate mc_constant(ConstantKind kind, int n, std::size_t samples, std::uint64_t seed);
// As mc_constant; ConsistencyError when the estimate is more than 5 standard
// errors from the quadrature value.
McEstimate verify_constant(ConstantKind kind, int n, std::size_t samples, std::uint64_t seed);

struct FlatBubble {
    Vec a;
    double lambda = 1.0;
};

// Interaction of two flat bubbles (kernel |a-b|^2).
double flat_eps(const FlatBubble& i, const FlatBubble& j, int n);

struct InteractionEstimate {
    McEstimate integral;  // int phi_i^{(n+2)/(n-2)} phi_j
    double eps = 0.0;
    double b1 = 0.0;
    double ratio = 0.0;  // integral / (b1 eps)
    double ratio_error = 0.0;
};

// PrecisionError when the relative standard error exceeds max_rel_error.
InteractionEstimate verify_interaction(const FlatBubble& i, const FlatBubble& j, int n, std::size_t samples,
                                       std::uint64_t seed, double max_rel_error = 0.05);

// Adds constant (and optionally interaction) checks to a verify report.
void append_quadrature_checks(ScenarioReport& rep, std::uint64_t seed, std::size_t samples, bool interactions);

}  // namespace shadowflow
