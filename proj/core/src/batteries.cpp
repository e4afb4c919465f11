#include "shadowflow/batteries.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace shadowflow {

std::string to_string(BatteryOutcome o) {
    switch (o) {
        case BatteryOutcome::ok: return "ok";
        case BatteryOutcome::violated: return "violated";
        case BatteryOutcome::hypothesis_unmet: return "hypothesis unmet";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BatteryResult unmet(std::string why) { return {BatteryOutcome::hypothesis_unmet, 0.0, std::move(why)}; }

bool lambda_ascending(const BubbleState& s) {
    for (int i = 1; i < s.p(); ++i)
        if (s.bubbles[i].log_lambda < s.bubbles[i - 1].log_lambda) return false;
    return true;
}

bool alpha_ratios_bounded(const BubbleState& s) {
    for (const auto& x : s.bubbles)
        for (const auto& y : s.bubbles)
            if (x.alpha > 2.0 * y.alpha) return false;
    return true;
}

bool eps_small(const BubbleState& s, const GreenKernel& k) {
    for (int i = 0; i < s.p(); ++i)
        for (int j = i + 1; j < s.p(); ++j)
            if (eps(s, k, i, j) > kBatteryEpsMax) return false;
    return true;
}

double lam_a5(const Bubble& b) { return b.lambda() * std::pow(b.a.norm(), 5); }

bool lam_a5_ascending(const BubbleState& s) {
    for (int i = 1; i < s.p(); ++i)
        if (lam_a5(s.bubbles[i]) < lam_a5(s.bubbles[i - 1])) return false;
    return true;
}

double theta_weight(const ModificationConfig& m, const Bubble& b, double theta_eps) {
    const double t = lam_a5(b) / theta_eps;
    return t > 0.0 ? vartheta(m, t) : 0.0;
}

BatteryResult verdict(double lhs, double rhs, double c_required) {
    if (rhs <= 0.0) return {lhs >= 0.0 ? BatteryOutcome::ok : BatteryOutcome::violated, kInf, ""};
    const double c = lhs / rhs;
    return {c >= c_required ? BatteryOutcome::ok : BatteryOutcome::violated, c, ""};
}

}  // namespace

BatteryResult check_eij_large(const BubbleState& s, const GreenKernel& kernel, double C, double c_required) {
    if (s.p() < 2) throw UsageError("battery states need at least two bubbles");
    if (!lambda_ascending(s)) return unmet("scales not ordered ascending");
    if (!alpha_ratios_bounded(s)) return unmet("amplitude ratios outside [1/2, 2]");
    if (!eps_small(s, kernel)) return unmet("interaction above the small-eps regime");
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < s.p(); ++i) {
        const double w = std::pow(C, i);
        for (int j = 0; j < s.p(); ++j) {
            if (j == i) continue;
            const auto pt = pair_terms(s, kernel, i, j);
            lhs -= w * s.bubbles[j].alpha / s.bubbles[i].alpha * pt.dlog_lambda;
            if (i > j) rhs += w * pt.eps;
        }
    }
    return verdict(lhs, rhs, c_required);
}

double eij_small_constant(int n, int p, double C, double G) {
    return 0.5 * (n - 2) * G * (1.0 + std::pow(C, p - 1));
}

BatteryResult check_eij_small(const BubbleState& s, const GreenKernel& kernel, double C, double G) {
    if (s.p() < 2) throw UsageError("battery states need at least two bubbles");
    if (!lambda_ascending(s)) return unmet("scales not ordered ascending");
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < s.p(); ++i) {
        for (int j = 0; j < s.p(); ++j) {
            if (j == i) continue;
            const auto pt = pair_terms(s, kernel, i, j);
            lhs += std::pow(C, i) * pt.grad_a.norm();
            if (i > j) rhs += std::pow(C, j) * pt.eps;
        }
    }
    const double cp = eij_small_constant(s.dim(), s.p(), C, G);
    if (rhs <= 0.0) return {lhs <= 0.0 ? BatteryOutcome::ok : BatteryOutcome::violated, 0.0, ""};
    const double ratio = lhs / rhs;
    return {ratio <= cp ? BatteryOutcome::ok : BatteryOutcome::violated, ratio / cp, ""};
}

double kernel_gradient_ratio_sup(const GreenKernel& kernel, double max_distance) {
    const int n = kernel.dim();
    Vec a = Vec::Zero(n);
    double sup = 0.0;
    constexpr int kGrid = 4000;
    for (int k = 1; k <= kGrid; ++k) {
        Vec b = Vec::Zero(n);
        b[0] = max_distance * k / kGrid;
        const double g = kernel.g(a, b);
        if (g > 0.0) sup = std::max(sup, kernel.grad_g(a, b).norm() / std::sqrt(g));
    }
    return sup;
}

BatteryResult check_perturbed_pairwise(const BubbleState& s, const GreenKernel& kernel, const ModificationConfig& m,
                                       double theta_eps) {
    if (s.p() < 2) throw UsageError("battery states need at least two bubbles");
    if (!lambda_ascending(s) || !lam_a5_ascending(s)) return unmet("scales and lambda|a|^5 not ordered together");
    if (!eps_small(s, kernel)) return unmet("interaction above the small-eps regime");
    const double c_req = (s.dim() - 2) / 4.0;
    double worst = kInf;
    for (int i = 0; i < s.p(); ++i) {
        if (!(theta_weight(m, s.bubbles[i], theta_eps) > 0.0)) continue;
        for (int j = 0; j < i; ++j) {
            const auto pt = pair_terms(s, kernel, i, j);
            if (pt.eps <= 0.0) continue;
            worst = std::min(worst, -pt.dlog_lambda / pt.eps);
        }
    }
    return {worst >= c_req ? BatteryOutcome::ok : BatteryOutcome::violated, worst, ""};
}

BatteryResult check_perturbed_summed(const BubbleState& s, const GreenKernel& kernel, const ModificationConfig& m,
                                     double theta_eps, double C, double c_required) {
    if (s.p() < 2) throw UsageError("battery states need at least two bubbles");
    if (!lambda_ascending(s) || !lam_a5_ascending(s)) return unmet("scales and lambda|a|^5 not ordered together");
    if (!alpha_ratios_bounded(s)) return unmet("amplitude ratios outside [1/2, 2]");
    if (!eps_small(s, kernel)) return unmet("interaction above the small-eps regime");
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < s.p(); ++i) {
        const double w = std::pow(C, i) * theta_weight(m, s.bubbles[i], theta_eps);
        if (w == 0.0) continue;
        for (int j = 0; j < s.p(); ++j) {
            if (j == i) continue;
            const auto pt = pair_terms(s, kernel, i, j);
            lhs -= w * s.bubbles[j].alpha / s.bubbles[i].alpha * pt.dlog_lambda;
            rhs += w * pt.eps;
        }
    }
    return verdict(lhs, rhs, c_required);
}

BubbleState random_battery_state(std::mt19937_64& rng, int n, double radius) {
    std::uniform_int_distribution<int> pdist(2, 6);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int p = pdist(rng);
    std::vector<double> loglam(p);
    for (auto& l : loglam) l = std::log(10.0) + u01(rng) * (std::log(1e6) - std::log(10.0));
    std::sort(loglam.begin(), loglam.end());
    BubbleState s;
    for (int i = 0; i < p; ++i) {
        Vec dir(n);
        for (int k = 0; k < n; ++k) dir[k] = normal(rng);
        dir /= dir.norm();
        double r;
        if (u01(rng) < 0.5)
            r = radius * std::pow(u01(rng), 1.0 / n);
        else
            r = std::exp(std::log(1e-3) + u01(rng) * (std::log(radius) - std::log(1e-3)));
        const double alpha = std::exp((u01(rng) - 0.5) * std::log(2.0));
        s.bubbles.push_back({alpha, loglam[i], dir * r});
    }
    return s;
}

BubbleState align_centers_with_scales(const BubbleState& s) {
    BubbleState out = s;
    std::vector<Vec> centers;
    for (const auto& b : s.bubbles) centers.push_back(b.a);
    std::sort(centers.begin(), centers.end(), [](const Vec& x, const Vec& y) { return x.norm() < y.norm(); });
    for (int i = 0; i < out.p(); ++i) out.bubbles[i].a = centers[i];
    return out;
}

namespace {

struct Tally {
    int ok = 0, violated = 0, unmet = 0;
    double extreme;
    std::string witness;
    explicit Tally(double init) : extreme(init) {}

    void add(const BatteryResult& r, bool lower_is_worse, const BubbleState& s, int trial) {
        switch (r.outcome) {
            case BatteryOutcome::hypothesis_unmet: ++unmet; return;
            case BatteryOutcome::ok: ++ok; break;
            case BatteryOutcome::violated:
                ++violated;
                if (witness.empty()) {
                    witness = fmt::format("trial {}: p={}, measured {:.6g}, lambdas", trial, s.p(), r.measured);
                    for (const auto& b : s.bubbles) witness += fmt::format(" {:.6g}", b.lambda());
                }
                break;
        }
        extreme = lower_is_worse ? std::min(extreme, r.measured) : std::max(extreme, r.measured);
    }
    std::string detail() const {
        auto d = fmt::format("ok {}, violated {}, hypothesis unmet {}", ok, violated, unmet);
        if (!witness.empty()) d += "; first witness " + witness;
        return d;
    }
};

}  // namespace

ScenarioReport verify_batteries(std::uint64_t seed, int trials, const BatteryOptions& opt) {
    if (trials < 1) throw UsageError("trials must be >= 1");
    const GreenKernel kernel(opt.n, opt.h0);
    const ModificationConfig m;
    const double G = kernel_gradient_ratio_sup(kernel, 2.0 * opt.chart_radius);
    const auto t0 = std::chrono::steady_clock::now();

    ScenarioReport rep;
    rep.scenario = "batteries";
    rep.config = {{"seed", seed},       {"trials", trials},         {"n", opt.n},
                  {"h0", opt.h0},       {"C_values", opt.C_values}, {"theta_eps", opt.theta_eps},
                  {"eps_max", kBatteryEpsMax}};
    rep.budgets["G"] = G;

    for (double C : opt.C_values) {
        std::mt19937_64 rng(seed);
        Tally large(kInf), small(0.0), pair(kInf), summed(kInf);
        for (int t = 0; t < trials; ++t) {
            const BubbleState s = random_battery_state(rng, opt.n, opt.chart_radius);
            large.add(check_eij_large(s, kernel, C), true, s, t);
            small.add(check_eij_small(s, kernel, C, G), false, s, t);
            const BubbleState sa = align_centers_with_scales(s);
            pair.add(check_perturbed_pairwise(sa, kernel, m, opt.theta_eps), true, sa, t);
            summed.add(check_perturbed_summed(sa, kernel, m, opt.theta_eps, C), true, sa, t);
        }
        const auto tag = fmt::format("C{:g}", C);
        rep.add({"B1_eij_large_" + tag, "interaction derivative in the scale dominates the weighted interactions",
                 large.violated == 0, false, large.extreme, 0.1, "min c; " + large.detail()});
        rep.add({"B2_eij_small_" + tag, "center derivatives of interactions are of the order of the interactions",
                 small.violated == 0, false, small.extreme, 1.0, "max of (lhs/rhs)/C'; " + small.detail()});
        rep.add({"B3_perturbed_pairwise_" + tag, "interaction sign with cut-off weights, pairwise form",
                 pair.violated == 0, false, pair.extreme, (opt.n - 2) / 4.0, "min c; " + pair.detail()});
        rep.add({"B4_perturbed_summed_" + tag, "interaction sign with cut-off weights, summed form",
                 summed.violated == 0, false, summed.extreme, 0.05, "min c; " + summed.detail()});
    }
    const auto q = vartheta_quasi_monotonicity(m);
    rep.add({"B5_vartheta_quasi_monotone", "cut-off weight is quasi-monotone", q.kappa_star <= opt.kappa_star_max,
             false, q.kappa_star, opt.kappa_star_max,
             fmt::format("worst pair r = {:.6g}, s = {:.6g}", q.worst_r, q.worst_s)});
    rep.budgets["kappa_star"] = q.kappa_star;
    rep.budgets["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.termination = "completed";
    return rep;
}

}  // namespace shadowflow
