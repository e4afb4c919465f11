#pragma once

#include "shadowflow/curvature_field.hpp"

#include <cmath>
#include <vector>

namespace shadowflow {

// Gaussian addition to the regular part: weight * exp(-|a-c|^2 / scale^2).
struct MassBump {
    Vec center;
    double weight = 0.0;
    double scale = 0.1;
};

// g(a,b) = |a-b|^2 (1 + h0 |a-b|^(n-2)), H(a) = h0 + sum of mass bumps.
class GreenKernel {
public:
    explicit GreenKernel(int n = 5, double h0 = 0.5, std::vector<MassBump> table = {});

    int dim() const noexcept { return n_; }
    double h0() const noexcept { return h0_; }
    const std::vector<MassBump>& table() const noexcept { return table_; }

    double g(const Vec& a, const Vec& b) const;
    // Gradient of g in its first argument.
    Vec grad_g(const Vec& a, const Vec& b) const;
    double H(const Vec& a) const;

private:
    int n_;
    double h0_;
    std::vector<MassBump> table_;
};

enum class WeakLimit { zero, positive };

struct Bubble {
    double alpha = 1.0;
    double log_lambda = 0.0;
    Vec a;

    double lambda() const { return std::exp(log_lambda); }
};

struct BubbleState {
    std::vector<Bubble> bubbles;
    WeakLimit mode = WeakLimit::zero;
    std::vector<double> omega;     // per bubble, positive-weak-limit mode only
    double omega_amplitude = 1.0;  // global amplitude of the weak limit

    int p() const noexcept { return static_cast<int>(bubbles.size()); }
    int dim() const noexcept { return bubbles.empty() ? 0 : static_cast<int>(bubbles.front().a.size()); }

    // Throws UsageError on inconsistent dimensions, non-positive amplitudes or
    // missing omega values.
    void validate() const;
};

double eps(const BubbleState& state, const GreenKernel& kernel, int i, int j);
// lambda_i d/d(lambda_i) eps_ij
double dlog_lambda_eps(const BubbleState& state, const GreenKernel& kernel, int i, int j);
// (1/lambda_i) grad_{a_i} eps_ij
Vec grad_a_eps(const BubbleState& state, const GreenKernel& kernel, int i, int j);

struct PairTerms {
    double eps = 0.0;
    double dlog_lambda = 0.0;
    Vec grad_a;
};

// All three quantities from one evaluation of the base expression.
PairTerms pair_terms(const BubbleState& state, const GreenKernel& kernel, int i, int j);

// Base above which eps is flushed to exactly zero.
inline constexpr double kEpsBaseFloor = 1e30;

}  // namespace shadowflow
