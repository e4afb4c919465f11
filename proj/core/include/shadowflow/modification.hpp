#pragma once

#include "shadowflow/shadow_dynamics.hpp"

namespace shadowflow {

// Shape of the transition of eta2 on [1, 2].
//   log_quintic: S(log2 t), quintic smoothstep in log2 t (default)
//   quintic:     S(t - 1)
enum class EtaProfile { log_quintic, quintic };

struct ModificationConfig {
    double eps_strength = 0.1;  // strength of the compactifying drift
    double eps_inner = 0.05;    // cut-off threshold, eps_inner << eps_strength
    double delta_plateau = 0.37;
    EtaProfile profile = EtaProfile::log_quintic;

    void validate() const;
};

double eta2(const ModificationConfig& m, double t);
double eta2_prime(const ModificationConfig& m, double t);
double eta2_second(const ModificationConfig& m, double t);
inline double eta1(const ModificationConfig& m, double t) { return 1.0 - eta2(m, t); }

struct Cutoffs {
    double eta_a = 0.0;
    double eta_alam = 0.0;
};

// eta_a = eta1(|a_i| / eps_inner), eta_alam = eta2(lambda_i |a_i|^2 / eps_inner).
Cutoffs cutoffs(const BubbleState& state, const ModificationConfig& m, int i);

// Contribution of the compactifying field to da_i (zero where the cut-offs vanish).
Vec modification_drift(const BubbleState& state, const CoefficientSet& coeffs, const ModificationConfig& m, int i);

StateDerivative rhs_modified(const BubbleState& state, const CurvatureField& field, const GreenKernel& kernel,
                             const CoefficientSet& coeffs, const ModificationConfig& m,
                             AlphaMode alpha_mode = AlphaMode::slaved);

// eta2(t) + eta2'(t) t ln t
double vartheta(const ModificationConfig& m, double t);

struct QuasiMonotonicity {
    double kappa_star = 1.0;
    double worst_r = 0.0;
    double worst_s = 0.0;
};

// Smallest kappa with vartheta(r) <= kappa vartheta(s) for all grid points r < s.
QuasiMonotonicity vartheta_quasi_monotonicity(const ModificationConfig& m, double t_lo = 0.05, double t_hi = 4.0,
                                              int grid = 200001);

}  // namespace shadowflow
