#include "shadowflow/interaction_kernel.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

namespace shadowflow {

GreenKernel::GreenKernel(int n, double h0, std::vector<MassBump> table)
    : n_(n), h0_(h0), table_(std::move(table)) {
    if (n < 3) throw UsageError(fmt::format("dimension n={} unsupported", n));
    if (!(h0 > 0.0)) throw UsageError("regular part h0 must be positive");
    for (const auto& m : table_) {
        if (m.center.size() != n) throw UsageError("mass table center dimension does not match n");
        if (!(m.weight >= 0.0)) throw UsageError("mass table weights must be nonnegative");
        if (!(m.scale > 0.0)) throw UsageError("mass table scales must be positive");
    }
}

double GreenKernel::g(const Vec& a, const Vec& b) const {
    const double r2 = (a - b).squaredNorm();
    return r2 * (1.0 + h0_ * std::pow(r2, 0.5 * (n_ - 2)));
}

Vec GreenKernel::grad_g(const Vec& a, const Vec& b) const {
    const Vec d = a - b;
    const double r2 = d.squaredNorm();
    return (2.0 + n_ * h0_ * std::pow(r2, 0.5 * (n_ - 2))) * d;
}

double GreenKernel::H(const Vec& a) const {
    double h = h0_;
    for (const auto& m : table_) h += m.weight * std::exp(-(a - m.center).squaredNorm() / (m.scale * m.scale));
    return h;
}

void BubbleState::validate() const {
    if (bubbles.empty()) throw UsageError("state has no bubbles");
    const auto n = bubbles.front().a.size();
    for (const auto& b : bubbles) {
        if (b.a.size() != n) throw UsageError("bubble centers have inconsistent dimension");
        if (!(b.alpha > 0.0) || !std::isfinite(b.alpha)) throw UsageError("bubble amplitude must be positive");
        if (!std::isfinite(b.log_lambda) || !b.a.allFinite()) throw UsageError("bubble state not finite");
    }
    if (mode == WeakLimit::positive) {
        if (omega.size() != bubbles.size()) throw UsageError("positive weak limit needs one omega per bubble");
        for (double w : omega)
            if (!(w > 0.0)) throw UsageError("omega values must be positive");
        if (!(omega_amplitude > 0.0)) throw UsageError("weak-limit amplitude must be positive");
    }
}

namespace {

void check_pair(const BubbleState& s, int i, int j) {
    if (i == j) throw UsageError("interaction requested for i == j");
    if (i < 0 || j < 0 || i >= s.p() || j >= s.p())
        throw UsageError(fmt::format("bubble index ({}, {}) out of range for p={}", i, j, s.p()));
}

}  // namespace

PairTerms pair_terms(const BubbleState& state, const GreenKernel& kernel, int i, int j) {
    check_pair(state, i, j);
    const auto& bi = state.bubbles[i];
    const auto& bj = state.bubbles[j];
    const double n = kernel.dim();
    const double li = bi.lambda();
    const double lj = bj.lambda();
    const double ratio = std::exp(bi.log_lambda - bj.log_lambda);
    const double g = kernel.g(bi.a, bj.a);
    const double base = ratio + 1.0 / ratio + li * lj * g;
    PairTerms t;
    if (!(base <= kEpsBaseFloor)) {
        t.grad_a = Vec::Zero(bi.a.size());
        return t;
    }
    t.eps = std::pow(base, 0.5 * (2.0 - n));
    const double epow = std::pow(base, -0.5 * n);  // eps^{n/(n-2)}
    const double c = -0.5 * (n - 2.0) * epow;
    t.dlog_lambda = c * (ratio - 1.0 / ratio + li * lj * g);
    t.grad_a = (c * lj) * kernel.grad_g(bi.a, bj.a);
    return t;
}

double eps(const BubbleState& state, const GreenKernel& kernel, int i, int j) {
    return pair_terms(state, kernel, i, j).eps;
}

double dlog_lambda_eps(const BubbleState& state, const GreenKernel& kernel, int i, int j) {
    return pair_terms(state, kernel, i, j).dlog_lambda;
}

Vec grad_a_eps(const BubbleState& state, const GreenKernel& kernel, int i, int j) {
    return pair_terms(state, kernel, i, j).grad_a;
}

}  // namespace shadowflow
