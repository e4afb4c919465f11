#include "shadowflow/shadow_dynamics.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace shadowflow {

namespace {

struct Local {
    Jet jet;
    double lambda = 0.0;
    double H = 0.0;
};

std::vector<Local> locals(const BubbleState& s, const CurvatureField& field, const GreenKernel& kernel) {
    std::vector<Local> out(s.p());
    for (int i = 0; i < s.p(); ++i) {
        const auto& b = s.bubbles[i];
        out[i].jet = field.eval_jet(b.a);
        if (!(out[i].jet.K > 0.0))
            throw DomainError(fmt::format("K(a_{}) = {:.6g} is not positive", i, out[i].jet.K));
        out[i].lambda = b.lambda();
        out[i].H = kernel.H(b.a);
    }
    return out;
}

// pairs[i][j] holds the interaction terms seen from bubble i.
std::vector<std::vector<PairTerms>> all_pairs(const BubbleState& s, const GreenKernel& kernel) {
    const int p = s.p();
    std::vector<std::vector<PairTerms>> out(p, std::vector<PairTerms>(p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (i != j) out[i][j] = pair_terms(s, kernel, i, j);
    return out;
}

void check_inputs(const BubbleState& s, const CurvatureField& field, const GreenKernel& kernel,
                  const CoefficientSet& coeffs) {
    s.validate();
    if (s.dim() != field.dim() || kernel.dim() != field.dim() || coeffs.n != field.dim())
        throw UsageError("dimension mismatch between state, field, kernel and coefficients");
}

}  // namespace

std::vector<double> equilibrium_alpha(const BubbleState& state, const CurvatureField& field,
                                      const CoefficientSet& coeffs) {
    const double n = coeffs.n;
    std::vector<double> out(state.p());
    for (int i = 0; i < state.p(); ++i) {
        const double K = field.value(state.bubbles[i].a);
        if (!(K > 0.0)) throw DomainError(fmt::format("K(a_{}) = {:.6g} is not positive", i, K));
        out[i] = std::pow(coeffs.Z() / (coeffs.kappa * K), 0.25 * (n - 2.0));
    }
    return out;
}

void slave_alpha(BubbleState& state, const CurvatureField& field, const CoefficientSet& coeffs) {
    const auto al = equilibrium_alpha(state, field, coeffs);
    for (int i = 0; i < state.p(); ++i) state.bubbles[i].alpha = al[i];
}

SigmaTriple sigma_leading(const BubbleState& state, const CurvatureField& field, const GreenKernel& kernel,
                          const CoefficientSet& cs) {
    check_inputs(state, field, kernel, cs);
    if (state.mode != WeakLimit::zero) throw UsageError("sigma_leading requires zero-weak-limit mode");
    const int p = state.p();
    const double n = cs.n;
    const double Z = cs.Z();
    const double k = cs.kappa;
    const auto loc = locals(state, field, kernel);
    const auto pairs = all_pairs(state, kernel);

    const double d2 = Z * cs.c2 * cs.gamma1;
    const double e2 = cs.c2 * cs.gamma2;
    const double b2 = cs.c2 * cs.b_lambda;
    const double e3 = cs.c3 * cs.gamma3;
    const double e4 = cs.c3 * cs.gamma_nabla_lap;
    const double b3 = cs.c3 * cs.b_a;

    std::vector<double> bracket(p), al(p);
    for (int i = 0; i < p; ++i) {
        al[i] = state.bubbles[i].alpha;
        bracket[i] = k * std::pow(al[i], 4.0 / (n - 2.0)) * loc[i].jet.K - Z;
    }

    SigmaTriple st;
    st.per_bubble.resize(p);
    for (int i = 0; i < p; ++i) {
        const auto& L = loc[i];
        const double a_i = al[i];
        const double a4 = std::pow(a_i, 4.0 / (n - 2.0));
        const double a_np2 = std::pow(a_i, (n + 2.0) / (n - 2.0));
        const double lam = L.lambda;

        double s1 = a_i * bracket[i] * cs.c1;
        double s2 = d2 * a_i * L.H / std::pow(lam, n - 2.0) + e2 * k * a_np2 * L.jet.lap / (lam * lam);
        Vec s3 = (e3 * k * a_np2 / lam) * L.jet.grad + (e4 * k * a_np2 / (lam * lam * lam)) * L.jet.grad_lap;

        double sum_e = 0.0, sum_dl = 0.0;
        Vec sum_ga = Vec::Zero(field.dim());
        for (int j = 0; j < p; ++j) {
            if (j == i) continue;
            const auto& pt = pairs[i][j];
            s1 += al[j] * bracket[j] * cs.b1 * pt.eps;
            s2 -= b2 * al[j] * bracket[j] * pt.dlog_lambda;
            s3 += (b3 * al[j] * bracket[j]) * pt.grad_a;
            sum_e += al[j] * pt.eps;
            sum_dl += al[j] * pt.dlog_lambda;
            sum_ga += al[j] * pt.grad_a;
        }
        s1 += cs.b1 * k * a4 * L.jet.K * sum_e;
        s2 -= b2 * k * a4 * L.jet.K * sum_dl;
        s3 += (b3 * k * a4 * L.jet.K) * sum_ga;

        st.per_bubble[i] = {s1, s2, s3};
    }
    return st;
}

StateDerivative rhs_zero_weak_limit(const BubbleState& state, const CurvatureField& field,
                                    const GreenKernel& kernel, const CoefficientSet& cs, AlphaMode alpha_mode) {
    check_inputs(state, field, kernel, cs);
    if (state.mode != WeakLimit::zero) throw UsageError("rhs_zero_weak_limit requires zero-weak-limit mode");
    const int p = state.p();
    const double n = cs.n;
    const double k = cs.kappa;
    StateDerivative d;
    d.rates.resize(p);

    if (alpha_mode == AlphaMode::dynamic) {
        const auto st = sigma_leading(state, field, kernel, cs);
        const double Z = cs.Z();
        for (int i = 0; i < p; ++i) {
            const double a_i = state.bubbles[i].alpha;
            const double lam = state.bubbles[i].lambda();
            const auto& s = st.per_bubble[i];
            d.rates[i].dlog_alpha = k * s.sigma1 / (Z * a_i * cs.c1);
            d.rates[i].dlog_lambda = -k * s.sigma2 / (Z * a_i * cs.c2);
            d.rates[i].da = (k / (Z * a_i * cs.c3 * lam)) * s.sigma3;
        }
        return d;
    }

    const auto loc = locals(state, field, kernel);
    const auto al = equilibrium_alpha(state, field, cs);
    const auto pairs = all_pairs(state, kernel);
    for (int i = 0; i < p; ++i) {
        const auto& L = loc[i];
        const double lam = L.lambda;
        double sum_dl = 0.0;
        Vec sum_ga = Vec::Zero(field.dim());
        for (int j = 0; j < p; ++j) {
            if (j == i) continue;
            const double w = al[j] / al[i];
            sum_dl += w * pairs[i][j].dlog_lambda;
            sum_ga += w * pairs[i][j].grad_a;
        }
        const double minus_dl = k * (cs.gamma1 * L.H / std::pow(lam, n - 2.0) +
                                     cs.gamma2 * L.jet.lap / (L.jet.K * lam * lam) - cs.b_lambda * sum_dl);
        const Vec lam_adot = k * ((cs.gamma3 / (L.jet.K * lam)) * L.jet.grad +
                                  (cs.gamma_nabla_lap / (L.jet.K * lam * lam * lam)) * L.jet.grad_lap +
                                  cs.b_a * sum_ga);
        d.rates[i].dlog_alpha = 0.0;
        d.rates[i].dlog_lambda = -minus_dl;
        d.rates[i].da = lam_adot / lam;
    }
    return d;
}

StateDerivative rhs_positive_weak_limit(const BubbleState& state, const CurvatureField& field,
                                        const GreenKernel& kernel, const CoefficientSet& cs) {
    check_inputs(state, field, kernel, cs);
    if (state.mode != WeakLimit::positive)
        throw UsageError("rhs_positive_weak_limit requires positive-weak-limit mode");
    const int p = state.p();
    const double n = cs.n;
    const double k = cs.kappa;
    const auto loc = locals(state, field, kernel);
    const auto al = equilibrium_alpha(state, field, cs);
    const auto pairs = all_pairs(state, kernel);
    StateDerivative d;
    d.rates.resize(p);
    for (int i = 0; i < p; ++i) {
        const auto& L = loc[i];
        const double lam = L.lambda;
        double sum_dl = 0.0;
        Vec sum_ga = Vec::Zero(field.dim());
        for (int j = 0; j < p; ++j) {
            if (j == i) continue;
            const double w = al[j] / al[i];
            sum_dl += w * pairs[i][j].dlog_lambda;
            sum_ga += w * pairs[i][j].grad_a;
        }
        const double mass = state.omega_amplitude * state.omega[i] /
                            (al[i] * L.jet.K * std::pow(lam, 0.5 * (n - 2.0)));
        const double minus_dl = k * (cs.gamma1 * mass - cs.b_lambda * sum_dl);
        const Vec lam_adot = k * ((cs.gamma3 / (L.jet.K * lam)) * L.jet.grad + cs.b_a * sum_ga);
        d.rates[i].dlog_lambda = -minus_dl;
        d.rates[i].da = lam_adot / lam;
    }
    return d;
}

}  // namespace shadowflow
