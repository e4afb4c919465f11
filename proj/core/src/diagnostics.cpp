#include "shadowflow/diagnostics.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace shadowflow {

double theta(const BubbleState& state, const ModificationConfig& m, double C, double eps) {
    if (!(C > 1.0)) throw UsageError("theta weight base C must exceed 1");
    if (!(eps > 0.0)) throw UsageError("theta threshold must be positive");
    std::vector<double> v;
    v.reserve(state.p());
    for (const auto& b : state.bubbles) v.push_back(b.lambda() * std::pow(b.a.norm(), 5.0) / eps);
    std::sort(v.begin(), v.end());
    double out = 0.0, w = 1.0;
    for (double x : v) {
        w *= C;
        const double e = eta2(m, x);
        if (e > 0.0) out += w * e * std::log(x);
    }
    return out;
}

double psi(const BubbleState& state, double C, const std::vector<int>& subset) {
    if (!(C > 1.0)) throw UsageError("psi weight base C must exceed 1");
    if (subset.empty()) throw UsageError("psi requires a nonempty bubble subset");
    std::vector<double> ll;
    for (int i : subset) ll.push_back(state.bubbles.at(i).log_lambda);
    std::sort(ll.begin(), ll.end());  // 1/lambda descending
    double out = 0.0, w = 1.0;
    for (double x : ll) {
        w *= C;
        out -= w * x;
    }
    return out;
}

double psi(const BubbleState& state, double C) {
    std::vector<int> all(state.p());
    std::iota(all.begin(), all.end(), 0);
    return psi(state, C, all);
}

double mass_scale_invariant(const BubbleState& state, const CurvatureField& field, int i) {
    const auto& b = state.bubbles.at(i);
    const double lap = field.eval_jet(b.a).lap;
    if (!(lap < 0.0))
        throw DomainError(fmt::format("lap K(a_{}) = {:.6g} >= 0: outside the divergence regime", i, lap));
    return -b.lambda() * lap;
}

double energy_surrogate(const BubbleState& state, const CurvatureField& field, const CoefficientSet& cs) {
    const double n = cs.n;
    double s = 0.0;
    for (const auto& b : state.bubbles) {
        const double K = field.value(b.a);
        if (!(K > 0.0)) throw DomainError("energy surrogate needs K > 0 at all centers");
        s += std::pow(K, -0.5 * (n - 2.0));
    }
    return cs.Z() * std::pow(cs.c1, 2.0 / n) * std::pow(s, 2.0 / n);
}

DiagnosticSample sample_diagnostics(double t, const BubbleState& state, const CurvatureField& field,
                                    const GreenKernel& kernel, const CoefficientSet& coeffs,
                                    const ModificationConfig& m, const DiagnosticsConfig& dc) {
    DiagnosticSample d;
    d.t = t;
    for (int i = 0; i < state.p(); ++i) {
        const auto& b = state.bubbles[i];
        const double an = b.a.norm();
        const double lam = b.lambda();
        d.lam_a2.push_back(lam * an * an);
        d.lam_a5.push_back(lam * std::pow(an, 5.0));
        const double lap = field.eval_jet(b.a).lap;
        d.mass_inv.push_back(lap < 0.0 ? -lam * lap : std::numeric_limits<double>::quiet_NaN());
    }
    d.theta = theta(state, m, dc.C, dc.theta_eps);
    d.psi = psi(state, dc.C);
    d.energy = energy_surrogate(state, field, coeffs);
    for (int i = 0; i < state.p(); ++i)
        for (int j = i + 1; j < state.p(); ++j) d.eps_pairs.push_back(eps(state, kernel, i, j));
    return d;
}

LyapunovVerdict check_lyapunov(const std::vector<double>& series, Direction direction, double slack) {
    if (series.size() < 2) throw UsageError("Lyapunov check needs at least two samples");
    if (!(slack >= 0.0)) throw UsageError("Lyapunov slack must be nonnegative");
    LyapunovVerdict v;
    v.slack = slack;
    for (std::size_t k = 1; k < series.size(); ++k) {
        double inc = series[k] - series[k - 1];
        if (direction == Direction::nondecreasing) inc = -inc;
        if (inc > 0.0) {
            v.violation += inc;
            if (inc > v.worst_step) {
                v.worst_step = inc;
                v.worst_index = k;
            }
        }
    }
    v.passed = v.violation <= slack;
    return v;
}

}  // namespace shadowflow
