#include "oracles.hpp"
#include "shadowflow/batteries.hpp"
#include "shadowflow/coefficients.hpp"
#include "shadowflow/config.hpp"
#include "shadowflow/diagnostics.hpp"
#include "shadowflow/interaction_kernel.hpp"
#include "shadowflow/quadverify.hpp"
#include "shadowflow/scenarios.hpp"
#include "shadowflow/shadow_dynamics.hpp"
#include "shadowflow/trajectory_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace shadowflow;

namespace {

struct Verdict {
    bool ok = true;
    std::vector<std::string> failures;
    std::string summary;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            failures.push_back(what);
        }
    }
};

std::string config_path(const std::string& file) { return std::string(SHADOWFLOW_CONFIG_DIR) + "/" + file; }

RunConfig shipped(const std::string& file, const std::string& scenario) {
    return load_config(config_path(file), scenario);
}

void require_report(Verdict& v, const ScenarioReport& rep, const std::vector<std::string>& names) {
    v.require(rep.self_validate(), rep.scenario + ": report self-validation");
    for (const auto& n : names) {
        const Check* c = rep.find(n);
        v.require(c != nullptr, rep.scenario + ": missing check " + n);
        if (c) v.require(c->passed && !c->informational, fmt::format("{}: {} (measured {:.6g}, bound {:.6g})",
                                                                     rep.scenario, n, c->measured, c->bound));
    }
    v.require(rep.all_passed(), rep.scenario + ": some check failed");
}

// Largest step against the requested direction, sign +1 for nondecreasing.
double worst_step(const std::vector<double>& s, double sign) {
    double w = 0.0;
    for (std::size_t k = 1; k < s.size(); ++k) w = std::max(w, -sign * (s[k] - s[k - 1]));
    return w;
}

Verdict criterion1() {
    Verdict v;
    const double pi = std::numbers::pi;
    const double c1 = bubble_constant(ConstantKind::c1, 5);
    const double b1 = bubble_constant(ConstantKind::b1, 5);
    v.require(std::abs(c1 - pi * pi * pi / 32.0) <= 1e-6, fmt::format("c1 = {:.12g}", c1));
    v.require(std::abs(b1 - 8.0 * pi * pi / 15.0) <= 1e-6, fmt::format("b1 = {:.12g}", b1));
    v.require(std::abs(c1 - oracle::bubble_constant(ConstantKind::c1, 5)) <= 1e-6, "c1 vs Beta form");
    v.require(std::abs(b1 - oracle::bubble_constant(ConstantKind::b1, 5)) <= 1e-6, "b1 vs Beta form");
    double zmax = 0.0;
    for (ConstantKind k : {ConstantKind::c1, ConstantKind::c2, ConstantKind::c3, ConstantKind::b1}) {
        const auto e = mc_constant(k, 5, 1'000'000, 2024);
        const double z = std::abs(e.value - bubble_constant(k, 5)) / e.std_error;
        zmax = std::max(zmax, z);
        v.require(z <= 3.0, fmt::format("{} Monte-Carlo at {:.2f} sigma", to_string(k), z));
    }
    v.summary = fmt::format("c1 err {:.2e}, b1 err {:.2e}, max MC deviation {:.2f} sigma",
                            std::abs(c1 - pi * pi * pi / 32.0), std::abs(b1 - 8.0 * pi * pi / 15.0), zmax);
    return v;
}

Verdict criterion2() {
    Verdict v;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lg(std::log(1e-3), std::log(1e3));
    double worst = 0.0;
    const double ulp = std::numeric_limits<double>::epsilon();
    for (int t = 0; t < 10000; ++t) {
        CoefficientOverrides o;
        o.gamma2 = std::exp(lg(rng));
        if (t % 2) o.gamma3 = 3.0 * *o.gamma2;
        if (t % 3 == 0) o.gamma1 = std::exp(lg(rng));
        const auto cs = make_coefficients(5, o);
        const double g2 = cs.gamma2, g3 = cs.gamma3;
        const double r1 = std::abs((4.0 * 7.0 * g2 - 5.0 * 4.0 * g3) - (-32.0 * g2)) / (32.0 * g2);
        const double l2 = -784.0 * g2 + 224.0 * g3;
        const double r2 = std::abs(l2 - (-112.0 * g2)) / (112.0 * g2);
        worst = std::max({worst, r1, r2});
        v.require(r1 <= 64.0 * ulp, fmt::format("first identity, gamma2 = {:.6g}", g2));
        v.require(r2 <= 1024.0 * ulp, fmt::format("second identity, gamma2 = {:.6g}", g2));
        v.require(l2 < 0.0, "second identity sign");
        if (!v.ok) break;
    }
    v.summary = fmt::format("10000 coefficient sets, worst relative residual {:.2e}", worst);
    return v;
}

void check_divergence(Verdict& v, const RunConfig& c) {
    const auto res = run_divergence(c);
    require_report(v, res.report,
                   {"D1_lambda_cubed_over_t", "D2a_center_monotone", "D3b_regime_floor", "D4_scale_invariant_monotone"});
    const auto& tr = res.trajectories.front().second;
    const auto& pert = c.integrator.pert;
    const double tol = c.integrator.tol;
    const double T = tr.back().t;
    const double budget = pert.family == PertFamily::off ? 0.0 : pert_budget(pert, 0.0);

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    int cnt = 0;
    std::vector<double> an, la2, lm;
    const Model m(c);
    for (const auto& s : tr.samples) {
        const auto& b = s.state.bubbles[0];
        const double lam = std::exp(b.log_lambda);
        an.push_back(b.a.norm());
        la2.push_back(lam * b.a.squaredNorm());
        const Jet j = m.field.eval_jet(b.a);
        lm.push_back(std::log(-lam * j.lap));
        if (s.t >= 0.5 * T && s.t > 0.0) {
            const double q = lam * lam * lam / s.t;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            sum += q;
            ++cnt;
        }
    }
    const double spread = (hi - lo) / (sum / cnt);
    v.require(cnt > 1 && lo > 0.0 && spread < 0.1, fmt::format("lambda^3/t spread {:.4f}", spread));
    const double a_slack = 10.0 * tol * an.front() + (pert.target_a ? budget * an.front() : 0.0);
    v.require(worst_step(an, -1.0) <= a_slack, "|a| not monotone");
    const double floor = 0.9 * la2.front() * (1.0 - 10.0 * tol);
    v.require(*std::min_element(la2.begin(), la2.end()) >= floor, "lambda|a|^2 below 0.9 of its initial value");
    const double lm_slack = pert.channel_weight() * budget + 10.0 * tol;
    v.require(worst_step(lm, 1.0) <= lm_slack, fmt::format("ln(-lambda lap K) decrease {:.3g}", worst_step(lm, 1.0)));
    v.summary += fmt::format("[{}: {} samples, spread {:.4f}, lambda growth {:.2f}] ", c.integrator.pert.family ==
                             PertFamily::off ? "off" : "adversarial", tr.samples.size(), spread,
                             std::exp(tr.back().state.bubbles[0].log_lambda - tr.samples.front().state.bubbles[0].log_lambda));
}

Verdict criterion3() {
    Verdict v;
    const auto c = shipped("divergence.yaml", "divergence");
    v.require(c.scenario.eps0 == 0.05 && c.scenario.lambda0 == 1e4 && c.scenario.a0 == 0.05 &&
                  c.integrator.pert.family == PertFamily::off,
              "default divergence configuration");
    check_divergence(v, c);
    const auto ca = shipped("divergence_adversarial.yaml", "divergence");
    v.require(ca.integrator.pert.family == PertFamily::exp_decay && ca.integrator.pert.c == 0.1 &&
                  ca.integrator.pert.rate == 1.0 && ca.integrator.pert.policy == SignPolicy::adversarial,
              "adversarial exp_decay(0.1, 1) configuration");
    check_divergence(v, ca);
    return v;
}

Verdict criterion4() {
    Verdict v;
    const auto c = shipped("compactified.yaml", "compactified");
    v.require(c.modification.eps_strength == 0.1, "modification strength 0.1");
    const auto res = run_compactified(c);
    require_report(v, res.report,
                   {"C1_lam_a2_bounded", "C2_enters_inner_region", "C3_lambda_nonincreasing_after_entry",
                    "C4_lambda_bounded", "C4b_lambda_below_growth_target", "P1_paired_unmodified_diverges"});
    const auto& tr = res.trajectories.front().second;
    const double lam0 = std::exp(tr.samples.front().state.bubbles[0].log_lambda);
    const double tol = c.integrator.tol;
    double lam_max = 0.0;
    std::size_t entry = tr.samples.size();
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        const auto& b = tr.samples[k].state.bubbles[0];
        const double lam = std::exp(b.log_lambda);
        lam_max = std::max(lam_max, lam);
        if (entry == tr.samples.size() && lam * b.a.squaredNorm() <= 2.0 * c.modification.eps_inner * (1.0 + 10.0 * tol))
            entry = k;
    }
    v.require(lam_max <= 10.0 * lam0, fmt::format("sup lambda / lambda0 = {:.4g}", lam_max / lam0));
    v.require(entry < tr.samples.size(), "never entered the inner region");
    std::vector<double> ll;
    for (std::size_t k = entry; k < tr.samples.size(); ++k) ll.push_back(tr.samples[k].state.bubbles[0].log_lambda);
    v.require(ll.size() >= 2 && worst_step(ll, -1.0) <= 10.0 * tol, "lambda increased after entry");
    const auto cu = [&] {
        RunConfig d = c;
        d.scenario.modified = false;
        return d;
    }();
    const auto paired = run_divergence(cu);
    const Check* d5 = paired.report.find("D5_diverges");
    v.require(d5 && d5->passed, "paired unmodified run does not diverge");
    v.summary = fmt::format("sup lambda/lambda0 {:.4g}, entry at t = {:.4g}, {} samples after entry, paired growth {:.2f}",
                            lam_max / lam0, entry < tr.samples.size() ? tr.samples[entry].t : NAN, ll.size(),
                            d5 ? d5->measured : NAN);
    return v;
}

Verdict criterion5() {
    Verdict v;
    for (const std::string sub : {"mixed", "off_max"}) {
        const auto res = run_exclusions(shipped(sub + ".yaml", sub), sub);
        require_report(v, res.report, {"X1_psi_nondecreasing", "X2_lambda_bounded"});
        v.summary += fmt::format("[{}: {} checks] ", sub, res.report.checks.size());
    }
    const auto c = shipped("tower.yaml", "tower");
    const auto res = run_exclusions(c, "tower");
    require_report(v, res.report,
                   {"T1_theta_nonincreasing", "T3_integrability_proxy_converges", "T4_lambda_max_inequality"});
    v.require(res.trajectories.front().second.samples.front().state.p() == 2, "tower has two bubbles");
    v.summary += fmt::format("[tower: {} checks]", res.report.checks.size());
    return v;
}

Verdict criterion6() {
    Verdict v;
    const auto rep = verify_batteries(20240, 10000);
    v.require(rep.self_validate(), "battery report self-validation");
    int b5 = 0;
    for (const auto& c : rep.checks) {
        v.require(c.passed && !c.informational, fmt::format("{} (measured {:.6g})", c.name, c.measured));
        if (c.name.rfind("B5", 0) == 0) {
            ++b5;
            v.require(c.measured <= 2.0, fmt::format("kappa* = {:.6g}", c.measured));
            v.summary = fmt::format("{} checks, kappa* = {:.4f}", rep.checks.size(), c.measured);
        }
    }
    v.require(b5 == 1, "quasi-monotonicity check present");
    for (const std::string prefix : {"B1", "B2", "B3"}) {
        bool found = false;
        for (const auto& c : rep.checks) found = found || c.name.rfind(prefix, 0) == 0;
        v.require(found, prefix + " battery present");
    }
    return v;
}

Verdict criterion7() {
    Verdict v;
    constexpr double tol = 1e-5;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto in_ball = [&](double r_lo, double r_hi) {
        Vec x(5);
        for (int d = 0; d < 5; ++d) x[d] = nd(rng);
        return Vec(x / x.norm() * (r_lo + (r_hi - r_lo) * u(rng)));
    };
    auto unit = [&] { return in_ball(1.0, 1.0); };
    auto random_state = [&](int p) {
        BubbleState s;
        for (int i = 0; i < p; ++i)
            s.bubbles.push_back({0.7 + 0.7 * u(rng), std::log(10.0) + u(rng) * std::log(1e3), in_ball(0.0, 0.6)});
        return s;
    };
    Vec e0 = Vec::Zero(5);
    e0[0] = 0.4;
    const std::vector<CurvatureField> fields{CurvatureField(), CurvatureField(5, 1.0, {{e0, -0.04, 0.15}})};
    const GreenKernel kernel;
    const auto cs = make_coefficients(5);
    double w_jet = 0.0, w_eps = 0.0, w_rhs = 0.0;

    const double h = 1e-5;
    for (int k = 0; k < 1000; ++k) {
        const auto& f = fields[k % 2];
        const Vec x = in_ball(0.01, 0.98);
        const Jet j = f.eval_jet(x);
        Vec g(5), gl(5);
        double lap = 0.0;
        for (int d = 0; d < 5; ++d) {
            Vec e = Vec::Zero(5);
            e[d] = 1.0;
            g[d] = oracle::central_difference([&](const Vec& y) { return f.offset(y); }, x, e, h);
            lap += oracle::central_difference([&](const Vec& y) { return f.eval_jet(y).grad[d]; }, x, e, h);
            gl[d] = oracle::central_difference([&](const Vec& y) { return f.eval_jet(y).lap; }, x, e, h);
        }
        const double r = std::max({(g - j.grad).norm() / j.grad.norm(), std::abs(lap - j.lap) / std::abs(j.lap),
                                   (gl - j.grad_lap).norm() / j.grad_lap.norm()});
        w_jet = std::max(w_jet, r);
    }
    v.require(w_jet <= tol, fmt::format("field jet relative error {:.3g}", w_jet));

    for (int k = 0; k < 1000; ++k) {
        const auto s = random_state(2);
        const double an = dlog_lambda_eps(s, kernel, 0, 1);
        auto sp = s, sm = s;
        sp.bubbles[0].log_lambda += h;
        sm.bubbles[0].log_lambda -= h;
        const double fd = (eps(sp, kernel, 0, 1) - eps(sm, kernel, 0, 1)) / (2 * h);
        const Vec ga = grad_a_eps(s, kernel, 0, 1);
        const double lam = s.bubbles[0].lambda();
        Vec fa(5);
        for (int d = 0; d < 5; ++d) {
            auto ap = s, am = s;
            ap.bubbles[0].a[d] += h * 0.1;
            am.bubbles[0].a[d] -= h * 0.1;
            fa[d] = (eps(ap, kernel, 0, 1) - eps(am, kernel, 0, 1)) / (0.2 * h) / lam;
        }
        w_eps = std::max({w_eps, std::abs(fd - an) / std::abs(an), (fa - ga).norm() / ga.norm()});
    }
    v.require(w_eps <= tol, fmt::format("interaction derivative relative error {:.3g}", w_eps));

    for (int k = 0; k < 1000; ++k) {
        const auto s = random_state(1 + k % 3);
        const Vec dir = unit();
        const int i = static_cast<int>(u(rng) * s.p()) % s.p();
        auto rate = [&](double t) {
            auto q = s;
            q.bubbles[i].log_lambda += t;
            // Center step in the bubble's own length scale 1/lambda.
            q.bubbles[i].a += t * dir / s.bubbles[i].lambda();
            const auto d = rhs_zero_weak_limit(q, fields[k % 2], kernel, cs);
            return std::array<double, 2>{d.rates[i].dlog_lambda, d.rates[i].da.dot(dir)};
        };
        const auto f0 = rate(0.0), fp = rate(h), fm = rate(-h), fp2 = rate(2 * h), fm2 = rate(-2 * h);
        for (int c = 0; c < 2; ++c) {
            const double d1 = (fp[c] - fm[c]) / (2 * h);
            const double d2 = (fp2[c] - fm2[c]) / (4 * h);
            const double scale = std::max(std::abs(d1), std::abs(f0[c]));
            if (scale > 0.0) w_rhs = std::max(w_rhs, std::abs(d1 - d2) / scale);
        }
    }
    v.require(w_rhs <= tol, fmt::format("rhs smoothness relative error {:.3g}", w_rhs));
    v.summary = fmt::format("worst relative errors: jet {:.2e}, eps {:.2e}, rhs {:.2e}", w_jet, w_eps, w_rhs);
    return v;
}

Verdict criterion8() {
    Verdict v;
    const double lam = 100.0, target = 0.01;
    Vec ai = Vec::Zero(5), aj = Vec::Zero(5);
    aj[0] = std::sqrt(std::pow(target, -2.0 / 3.0) - 2.0) / lam;
    const FlatBubble bi{ai, lam}, bj{aj, lam};
    const auto r = verify_interaction(bi, bj, 5, 10'000'000, 8);
    v.require(std::abs(r.eps - target) <= 1e-12, fmt::format("eps = {:.6g}", r.eps));
    v.require(r.ratio >= 0.9 && r.ratio <= 1.1, fmt::format("ratio = {:.5f}", r.ratio));
    v.summary = fmt::format("eps {:.4g}, ratio {:.5f} +- {:.5f}", r.eps, r.ratio, r.ratio_error);
    return v;
}

Verdict criterion9() {
    Verdict v;
    auto c = shipped("divergence.yaml", "divergence");
    c.integrator.pert.family = PertFamily::exp_decay;
    c.integrator.pert.c = 0.05;
    c.integrator.pert.rate = 1.0;
    c.integrator.pert.policy = SignPolicy::random;
    c.integrator.pert.seed = 42;
    auto csv = [](const RunConfig& rc) {
        const auto res = run_scenario(rc);
        std::ostringstream os;
        write_csv(res.trajectories.front().second, os);
        return os.str();
    };
    const std::string a = csv(c), b = csv(c);
    v.require(!a.empty() && a == b, "trajectory CSV differs between identical runs");
    v.summary = fmt::format("{} bytes, identical", a.size());
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "bubble constants", 5.0, criterion1},
        {2, "coefficient identities", 1.0, criterion2},
        {3, "divergence at the maximum", 60.0, criterion3},
        {4, "compactified flow", 60.0, criterion4},
        {5, "exclusion scenarios", 120.0, criterion5},
        {6, "inequality batteries", 30.0, criterion6},
        {7, "derivative consistency", 10.0, criterion7},
        {8, "interaction estimate", 120.0, criterion8},
        {9, "determinism", std::numeric_limits<double>::infinity(), criterion9},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        v.require(secs < c.budget_s, fmt::format("runtime {:.2f} s exceeds {:.0f} s", secs, c.budget_s));
        std::string line = fmt::format("{} criterion {}: {} ({:.2f} s)", v.ok ? "PASS" : "FAIL", c.id, c.name, secs);
        if (!v.summary.empty()) line += " " + v.summary;
        fmt::print("{}\n", line);
        for (const auto& f : v.failures) fmt::print("    {}\n", f);
        failed += v.ok ? 0 : 1;
    }
    fmt::print("{} of {} criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
