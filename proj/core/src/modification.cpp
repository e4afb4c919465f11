#include "shadowflow/modification.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace shadowflow {

namespace {

double S(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double S1(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }
double S2(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }

double transition(const ModificationConfig& m, double t) {
    return m.profile == EtaProfile::log_quintic ? std::log2(t) : t - 1.0;
}

}  // namespace

void ModificationConfig::validate() const {
    if (!(eps_strength > 0.0)) throw UsageError("modification eps_strength must be positive");
    if (!(eps_inner > 0.0)) throw UsageError("modification eps_inner must be positive");
    if (!(delta_plateau >= 0.0)) throw UsageError("modification delta_plateau must be nonnegative");
}

double eta2(const ModificationConfig& m, double t) {
    if (t <= 1.0) return 0.0;
    if (t >= 2.0) return 1.0;
    return S(transition(m, t));
}

double eta2_prime(const ModificationConfig& m, double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    const double x = transition(m, t);
    return m.profile == EtaProfile::log_quintic ? S1(x) / (t * std::log(2.0)) : S1(x);
}

double eta2_second(const ModificationConfig& m, double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    const double x = transition(m, t);
    if (m.profile == EtaProfile::quintic) return S2(x);
    const double l2 = std::log(2.0);
    return (S2(x) - l2 * S1(x)) / (t * t * l2 * l2);
}

Cutoffs cutoffs(const BubbleState& state, const ModificationConfig& m, int i) {
    const auto& b = state.bubbles.at(i);
    const double an = b.a.norm();
    return {eta1(m, an / m.eps_inner), eta2(m, b.lambda() * an * an / m.eps_inner)};
}

Vec modification_drift(const BubbleState& state, const CoefficientSet& cs, const ModificationConfig& m, int i) {
    const auto& b = state.bubbles.at(i);
    const Cutoffs c = cutoffs(state, m, i);
    const double w = c.eta_a * c.eta_alam;
    if (w == 0.0) return Vec::Zero(b.a.size());
    const double lam = b.lambda();
    return (-cs.kappa * cs.gamma4 * m.eps_strength * w / (lam * lam * b.a.norm())) * b.a;
}

StateDerivative rhs_modified(const BubbleState& state, const CurvatureField& field, const GreenKernel& kernel,
                             const CoefficientSet& cs, const ModificationConfig& m, AlphaMode alpha_mode) {
    m.validate();
    StateDerivative d = rhs_zero_weak_limit(state, field, kernel, cs, alpha_mode);
    for (int i = 0; i < state.p(); ++i) d.rates[i].da += modification_drift(state, cs, m, i);
    return d;
}

double vartheta(const ModificationConfig& m, double t) {
    if (!(t > 0.0)) throw DomainError(fmt::format("vartheta requires t > 0, got {}", t));
    return eta2(m, t) + eta2_prime(m, t) * t * std::log(t);
}

QuasiMonotonicity vartheta_quasi_monotonicity(const ModificationConfig& m, double t_lo, double t_hi, int grid) {
    if (!(t_lo > 0.0) || !(t_hi > t_lo) || grid < 2) throw UsageError("invalid grid for quasi-monotonicity scan");
    QuasiMonotonicity q;
    double run_max = -1.0, run_arg = t_lo;
    for (int k = 0; k < grid; ++k) {
        const double s = t_lo + (t_hi - t_lo) * k / (grid - 1);
        const double vs = vartheta(m, s);
        if (k > 0 && vs > 0.0 && run_max > 0.0) {
            const double ratio = run_max / vs;
            if (ratio > q.kappa_star) {
                q.kappa_star = ratio;
                q.worst_r = run_arg;
                q.worst_s = s;
            }
        }
        if (k > 0 && run_max > 0.0 && vs <= 0.0) {
            // vartheta vanishing after being positive would make kappa* infinite
            q.kappa_star = std::numeric_limits<double>::infinity();
            q.worst_r = run_arg;
            q.worst_s = s;
            return q;
        }
        if (vs > run_max) {
            run_max = vs;
            run_arg = s;
        }
    }
    return q;
}

}  // namespace shadowflow
