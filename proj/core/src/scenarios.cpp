#include "shadowflow/scenarios.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace shadowflow {

Check& ScenarioReport::add(Check c) {
    checks.push_back(std::move(c));
    return checks.back();
}

const Check* ScenarioReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

bool ScenarioReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.passed; });
}

bool ScenarioReport::self_validate() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.anchor.empty(); });
}

nlohmann::json ScenarioReport::to_json() const {
    using nlohmann::json;
    json cj = json::array();
    for (const auto& c : checks) {
        auto num = [](double v) -> json {
            if (std::isfinite(v)) return v;
            return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
        };
        cj.push_back({{"name", c.name},
                      {"anchor", c.anchor},
                      {"passed", c.passed},
                      {"informational", c.informational},
                      {"measured", num(c.measured)},
                      {"bound", num(c.bound)},
                      {"detail", c.detail}});
    }
    return {{"scenario", scenario},   {"config", config},
            {"checks", cj},           {"budgets", budgets},
            {"termination", termination}, {"trajectory_files", trajectory_files},
            {"notes", notes},         {"all_passed", all_passed()},
            {"self_validated", self_validate()}};
}

Model::Model(const RunConfig& c)
    : field(c.field.n, c.field.chart_radius, c.field.bumps),
      kernel(c.field.n, c.kernel.h0, c.kernel.mass_table),
      coeffs(make_coefficients(c.field.n, c.coefficients)),
      modification(c.modification),
      diagnostics(c.diagnostics()) {
    modification.validate();
}

namespace {

// Local minimum of K off x0 with positive Laplacian, used to seat off-max bubbles.
Vec bump_critical_point(const CurvatureField& field) {
    const auto rep = validate_condition(field);
    const CriticalPoint* best = nullptr;
    for (const auto& cp : rep.critical_points) {
        if (cp.is_max_point || !(cp.lap > 0.0)) continue;
        if (!best || cp.negative_directions < best->negative_directions ||
            (cp.negative_directions == best->negative_directions && cp.lap > best->lap))
            best = &cp;
    }
    if (!best) throw UsageError("field has no critical point with lap K > 0 away from x0");
    return best->x;
}

}  // namespace

BubbleState initial_state(const RunConfig& c, const Model& m) {
    const auto& sc = c.scenario;
    const int n = c.field.n;
    BubbleState s;
    s.mode = sc.name == "mixed" ? WeakLimit::positive : WeakLimit::zero;
    s.omega_amplitude = sc.omega_amplitude;
    if (!sc.bubbles.empty()) {
        for (const auto& b : sc.bubbles) {
            if (!(b.lambda > 0.0)) throw UsageError("initial bubble scale must be positive");
            s.bubbles.push_back({1.0, std::log(b.lambda), b.a});
            s.omega.push_back(b.omega);
        }
    } else {
        if (!(sc.lambda0 > 0.0)) throw UsageError("lambda0 must be positive");
        Vec a = sc.name == "off_max" ? bump_critical_point(m.field) : Vec(Vec::Zero(n));
        if (sc.name != "off_max") a[0] = sc.a0;
        s.bubbles.push_back({1.0, std::log(sc.lambda0), a});
        s.omega.push_back(1.0);
    }
    if (s.mode == WeakLimit::zero) s.omega.clear();
    for (const auto& b : s.bubbles)
        if (!m.field.in_domain(b.a)) throw UsageError("initial bubble center outside the chart");
    slave_alpha(s, m.field, m.coeffs);
    s.validate();
    return s;
}

FlowSystem make_system(const RunConfig& c, const Model& m) {
    FlowSystem sys;
    const bool modified = c.scenario.modified;
    const AlphaMode am = c.scenario.alpha_mode;
    sys.rhs = [&m, modified, am](const BubbleState& s, double) {
        if (s.mode == WeakLimit::positive) return rhs_positive_weak_limit(s, m.field, m.kernel, m.coeffs);
        if (modified) return rhs_modified(s, m.field, m.kernel, m.coeffs, m.modification, am);
        return rhs_zero_weak_limit(s, m.field, m.kernel, m.coeffs, am);
    };
    if (am == AlphaMode::slaved || c.scenario.name == "mixed")
        sys.constrain = [&m](BubbleState& s) { slave_alpha(s, m.field, m.coeffs); };
    sys.diagnose = [&m](double t, const BubbleState& s) {
        return sample_diagnostics(t, s, m.field, m.kernel, m.coeffs, m.modification, m.diagnostics);
    };
    return sys;
}

namespace {

using Series = std::vector<double>;

Series channel(const Trajectory& tr, const std::function<double(const TrajectorySample&)>& f) {
    Series out;
    out.reserve(tr.samples.size());
    for (const auto& s : tr.samples) out.push_back(f(s));
    return out;
}

double first_event_time(const Trajectory& tr, const std::string& name) {
    for (const auto& e : tr.events)
        if (e.name == name) return e.t;
    return std::numeric_limits<double>::infinity();
}

constexpr double kSamplesPerHorizon = 2000.0;

class WallClock {
public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Integrate, extending an automatic horizon by 4x until a terminal event fires
// or the wall budget is spent.
Trajectory integrate_until_event(const FlowSystem& sys, const BubbleState& y0, double t_end, bool auto_horizon,
                                 const RunConfig& c, const std::vector<EventSpec>& events) {
    WallClock clock;
    for (;;) {
        IntegratorOptions opt;
        opt.max_steps = c.integrator.max_steps;
        opt.max_dt = t_end / kSamplesPerHorizon;
        if (c.integrator.wall_budget_s > 0.0)
            opt.wall_budget_s = std::max(1e-3, c.integrator.wall_budget_s - clock.elapsed());
        Trajectory tr = integrate(sys, y0, t_end, c.integrator.tol, c.integrator.pert, events, opt);
        if (!auto_horizon || tr.termination != Termination::t_end) return tr;
        if (c.integrator.wall_budget_s > 0.0 && clock.elapsed() >= c.integrator.wall_budget_s) return tr;
        t_end *= 4.0;
    }
}

void demote_if_nonintegrable(ScenarioReport& rep, const PerturbationModel& pert) {
    if (pert.integrable()) return;
    for (auto& ch : rep.checks) ch.informational = true;
    Check h{"H0_integrable_perturbation", "quadratic error terms have finite time integral", false, true,
            std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            "hypothesis int pert < inf violated; checks are informational"};
    rep.checks.insert(rep.checks.begin(), h);
    rep.notes.push_back("hypothesis int pert < inf violated");
}

void fill_common(ScenarioReport& rep, const RunConfig& c, const Trajectory& tr) {
    rep.config = to_json(c);
    rep.termination = tr.termination == Termination::event ? "event:" + tr.terminal_event : to_string(tr.termination);
    rep.budgets["pert_budget_total"] = pert_budget(c.integrator.pert, 0.0);
    rep.budgets["pert_budget_run"] = pert_budget(c.integrator.pert, 0.0, tr.samples.back().t);
    rep.budgets["channel_weight"] = c.integrator.pert.channel_weight();
    rep.budgets["tol"] = c.integrator.tol;
    rep.budgets["steps_accepted"] = tr.stats.accepted;
    rep.budgets["steps_rejected"] = tr.stats.rejected;
    rep.budgets["t_final"] = tr.samples.back().t;
    rep.budgets["wall_seconds"] = tr.stats.wall_seconds;
}

double budget_or_inf(const PerturbationModel& p, double t0) {
    const double b = pert_budget(p, t0);
    return std::isfinite(b) ? b : std::numeric_limits<double>::infinity();
}

void check_single_bubble_hypotheses(const BubbleState& y0, const RunConfig& c) {
    if (y0.p() != 1) throw UsageError(fmt::format("hypothesis p = 1 violated (p = {})", y0.p()));
    const auto& b = y0.bubbles[0];
    const double an = b.a.norm();
    const double eps0 = c.scenario.eps0;
    if (!(eps0 > 0.0)) throw UsageError("eps0 must be positive");
    if (!(an <= eps0)) throw UsageError(fmt::format("hypothesis |a0| <= eps0 violated (|a0| = {}, eps0 = {})", an, eps0));
    if (!(b.lambda() * an * an > 1.0 / eps0))
        throw UsageError(fmt::format("hypothesis lambda0 |a0|^2 > 1/eps0 violated ({} <= {})", b.lambda() * an * an,
                                     1.0 / eps0));
}

// Time for lambda to reach growth * lambda0 under the reduced divergence law,
// lambda^{2+2q} linear in t with |a| ~ lambda^{-q}, q = gamma3 / (gamma2 (n+2)).
double divergence_horizon(const Model& m, const BubbleState& y0, double growth) {
    const auto& cs = m.coeffs;
    const double n = cs.n;
    const double lam0 = y0.bubbles[0].lambda();
    const double a2 = y0.bubbles[0].a.squaredNorm();
    const double q = cs.gamma3 / (cs.gamma2 * (n + 2.0));
    const double e = 2.0 + 2.0 * q;
    const double rate = e * cs.kappa * cs.gamma2 * 4.0 * (n + 2.0) * a2 * std::pow(lam0, 2.0 * q);
    return 4.0 * (std::pow(growth * lam0, e) - std::pow(lam0, e)) / rate;
}

}  // namespace

ScenarioResult run_divergence(const RunConfig& c) {
    const Model m(c);
    const BubbleState y0 = initial_state(c, m);
    check_single_bubble_hypotheses(y0, c);
    const FlowSystem sys = make_system(c, m);
    const auto& pert = c.integrator.pert;
    const double lam0 = y0.bubbles[0].lambda();
    const double a0 = y0.bubbles[0].a.norm();
    const double tol = c.integrator.tol;

    const bool auto_h = !(c.integrator.t_end > 0.0);
    const double t_end = auto_h ? divergence_horizon(m, y0, c.scenario.growth_target) : c.integrator.t_end;
    const std::vector<EventSpec> events{lambda_max_event(c.scenario.growth_target * lam0),
                                        lambda_min_event(c.scenario.lambda_min_factor * lam0),
                                        chart_exit_event(0.99 * m.field.chart_radius()),
                                        lam_a2_enter_below_event(1.0 / c.scenario.eps0, false)};
    Trajectory tr = integrate_until_event(sys, y0, t_end, auto_h, c, events);

    ScenarioResult res;
    auto& rep = res.report;
    rep.scenario = c.scenario.name;
    fill_common(rep, c, tr);
    const double W = pert.channel_weight();
    const double budget = budget_or_inf(pert, 0.0);
    const double T = tr.samples.back().t;

    // D1: lambda^3 / t over the final half of the run.
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
        int cnt = 0;
        for (const auto& s : tr.samples) {
            if (s.t < 0.5 * T || s.t <= 0.0) continue;
            const double v = std::exp(3.0 * s.state.bubbles[0].log_lambda) / s.t;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
            ++cnt;
        }
        const double spread = cnt > 1 ? (hi - lo) / (sum / cnt) : std::numeric_limits<double>::infinity();
        rep.add({"D1_lambda_cubed_over_t", "single bubble at the maximum: lambda^3 grows linearly in t",
                 spread < 0.1 && lo > 0.0, false, spread, 0.1,
                 fmt::format("relative spread over {} samples in [T/2, T], mean {:.6g}", cnt, cnt ? sum / cnt : 0.0)});
    }
    // D2: center converges to the maximum.
    {
        const Series an = channel(tr, [](const TrajectorySample& s) { return s.state.bubbles[0].a.norm(); });
        const double slack = 10.0 * tol * a0 + (pert.target_a ? budget * a0 : 0.0);
        const auto v = check_lyapunov(an, Direction::nonincreasing, slack);
        rep.add({"D2a_center_monotone", "single bubble at the maximum: |a| decreases", v.passed, false, v.violation,
                 slack, fmt::format("worst step {:.3g} at sample {}", v.worst_step, v.worst_index)});
        const double af = an.back();
        rep.add({"D2b_center_halved", "single bubble at the maximum: a -> x0", af < 0.5 * a0, false, af / a0, 0.5,
                 "|a(T)| / |a0|"});
    }
    // D3: lambda |a|^2 stays in the divergence regime.
    {
        const Series la2 = channel(tr, [](const TrajectorySample& s) { return s.diag.lam_a2.at(0); });
        const double init = la2.front();
        const double mn = *std::min_element(la2.begin(), la2.end());
        const double bound_budget = init * std::exp(-W * budget) * (1.0 - 10.0 * tol);
        rep.add({"D3a_regime_budget", "lambda|a|^2 bounded below along the diverging line", mn >= bound_budget, false,
                 mn, bound_budget, fmt::format("min lambda|a|^2, initial {:.6g}", init)});
        const double floor = 0.9 * init * (1.0 - 10.0 * tol);
        rep.add({"D3b_regime_floor", "lambda|a|^2 bounded below along the diverging line", mn >= floor, false,
                 mn / init, 0.9 * (1.0 - 10.0 * tol), "min lambda|a|^2 / initial"});
    }
    // D4: ln(-lambda lap K(a)) nondecreasing.
    {
        const Series lm = channel(tr, [](const TrajectorySample& s) { return std::log(s.diag.mass_inv.at(0)); });
        const double slack = W * budget + 10.0 * tol;
        const auto v = check_lyapunov(lm, Direction::nondecreasing, slack);
        rep.add({"D4_scale_invariant_monotone", "ln(-lambda lap K(a)) is nondecreasing up to the error budget",
                 v.passed, false, v.violation, slack,
                 fmt::format("worst step {:.3g} at sample {}", v.worst_step, v.worst_index)});
    }
    // D5: the scale reached the growth target.
    {
        const double g = std::exp(tr.samples.back().state.bubbles[0].log_lambda) / lam0;
        const bool fired = tr.terminal_event == "lambda_max";
        rep.add({"D5_diverges", "single bubble at the maximum: lambda -> infinity", fired, false, g,
                 c.scenario.growth_target, "lambda(T) / lambda0"});
    }
    rep.budgets["slack_D4"] = W * budget + 10.0 * tol;
    demote_if_nonintegrable(rep, pert);
    res.trajectories.emplace_back("main", std::move(tr));
    return res;
}

ScenarioResult run_compactified(const RunConfig& c_in) {
    RunConfig c = c_in;
    c.scenario.modified = true;
    const Model m(c);
    const BubbleState y0 = initial_state(c, m);
    check_single_bubble_hypotheses(y0, c);
    const FlowSystem sys = make_system(c, m);
    const auto& pert = c.integrator.pert;
    const auto& cs = m.coeffs;
    const double n = cs.n;
    const double lam0 = y0.bubbles[0].lambda();
    const double a0 = y0.bubbles[0].a.norm();
    const double tol = c.integrator.tol;
    const double eps_in = c.modification.eps_inner;

    const bool auto_h = !(c.integrator.t_end > 0.0);
    double t_end = c.integrator.t_end;
    if (auto_h) {
        const double transit = a0 * lam0 * lam0 / (cs.kappa * cs.gamma4 * c.modification.eps_strength);
        const double H = m.kernel.H(y0.bubbles[0].a);
        const double shrink = std::pow(lam0, n - 2.0) / ((n - 2.0) * cs.kappa * cs.gamma1 * H * 0.3);
        t_end = 4.0 * (transit + shrink);
    }
    const std::vector<EventSpec> events{lambda_max_event(c.scenario.lambda_bound_factor * lam0),
                                        lambda_min_event(c.scenario.lambda_min_factor * lam0),
                                        chart_exit_event(0.99 * m.field.chart_radius()),
                                        lam_a2_enter_below_event(2.0 * eps_in, false)};
    Trajectory tr = integrate_until_event(sys, y0, t_end, auto_h, c, events);

    ScenarioResult res;
    auto& rep = res.report;
    rep.scenario = c.scenario.name;
    fill_common(rep, c, tr);
    const double W = pert.channel_weight();
    const double budget = budget_or_inf(pert, 0.0);

    const Series la2 = channel(tr, [](const TrajectorySample& s) { return s.diag.lam_a2.at(0); });
    const Series ll = channel(tr, [](const TrajectorySample& s) { return s.state.bubbles[0].log_lambda; });
    {
        const double mx = *std::max_element(la2.begin(), la2.end());
        // Additive log perturbations act multiplicatively: 1 + budget C with C = (exp(W budget) - 1) / budget.
        const double bound = std::max(la2.front(), 2.0 * eps_in) * std::exp(W * budget) * (1.0 + 10.0 * tol);
        rep.add({"C1_lam_a2_bounded", "modified flow: lambda|a|^2 is bounded", mx <= bound, false, mx, bound,
                 "sup lambda|a|^2"});
    }
    const double t_in = first_event_time(tr, "lam_a2_below");
    rep.add({"C2_enters_inner_region", "modified flow: lambda|a|^2 < 2 eps_inner in finite time", std::isfinite(t_in),
             false, t_in, tr.samples.back().t, "entry time into {lambda|a|^2 < 2 eps_inner}"});
    {
        Series after;
        for (std::size_t k = 0; k < tr.samples.size(); ++k)
            if (tr.samples[k].t >= t_in) after.push_back(ll[k]);
        const double slack = W * budget_or_inf(pert, std::isfinite(t_in) ? t_in : 0.0) + 10.0 * tol;
        if (after.size() >= 2) {
            const auto v = check_lyapunov(after, Direction::nonincreasing, slack);
            rep.add({"C3_lambda_nonincreasing_after_entry", "modified flow: mass term dominates, lambda decreases",
                     v.passed, false, v.violation, slack, fmt::format("{} samples after entry", after.size())});
        } else {
            rep.add({"C3_lambda_nonincreasing_after_entry", "modified flow: mass term dominates, lambda decreases",
                     false, false, std::numeric_limits<double>::quiet_NaN(), slack, "no samples after entry"});
        }
    }
    {
        const bool no_max = !tr.fired("lambda_max");
        const auto d = sys.rhs(tr.samples.back().state, tr.samples.back().t);
        const double dl = d.rates[0].dlog_lambda;
        rep.add({"C4_lambda_bounded", "modified flow: lambda -> infinity is impossible", no_max && dl <= 0.0, false,
                 dl, 0.0, "final dlog_lambda (and no lambda_max event)"});
        const double mx = std::exp(*std::max_element(ll.begin(), ll.end())) / lam0;
        rep.add({"C4b_lambda_below_growth_target", "modified flow: lambda -> infinity is impossible",
                 mx <= c.scenario.growth_target, false, mx, c.scenario.growth_target, "sup lambda / lambda0"});
    }

    // Paired unmodified arm on identical data.
    RunConfig cu = c;
    cu.scenario.modified = false;
    auto paired = run_divergence(cu);
    const Check* d5 = paired.report.find("D5_diverges");
    rep.add({"P1_paired_unmodified_diverges", "unmodified flow from the same data escapes to infinity",
             d5 && d5->passed, false, d5 ? d5->measured : 0.0, c.scenario.growth_target,
             "lambda(T) / lambda0 of the unmodified twin"});
    rep.budgets["paired_termination"] = paired.report.termination;

    demote_if_nonintegrable(rep, pert);
    res.trajectories.emplace_back("main", std::move(tr));
    for (auto& p : paired.trajectories) res.trajectories.emplace_back("paired", std::move(p.second));
    return res;
}

namespace {

void psi_and_bounded_checks(ScenarioReport& rep, const RunConfig& c, const Model& m, const FlowSystem& sys,
                            const Trajectory& tr, const std::vector<int>& subset, const std::string& anchor) {
    const auto& pert = c.integrator.pert;
    const double C = c.scenario.C;
    const double budget = budget_or_inf(pert, 0.0);
    double wsum = 0.0, w = 1.0;
    for (std::size_t i = 0; i < subset.size(); ++i) wsum += (w *= C);
    const Series ps = channel(tr, [&](const TrajectorySample& s) { return psi(s.state, C, subset); });
    const double slack = (pert.target_log_lambda ? wsum * budget : 0.0) + 10.0 * c.integrator.tol * (1.0 + std::abs(ps.front()));
    const auto v = check_lyapunov(ps, Direction::nondecreasing, slack);
    rep.add({"X1_psi_nondecreasing", anchor + ": psi is nondecreasing", v.passed, false, v.violation, slack,
             fmt::format("worst step {:.3g} at sample {}", v.worst_step, v.worst_index)});

    const auto& y0 = tr.samples.front().state;
    double worst = 0.0;
    for (const auto& s : tr.samples)
        for (int i = 0; i < s.state.p(); ++i)
            worst = std::max(worst, s.state.bubbles[i].log_lambda - y0.bubbles[i].log_lambda);
    const double bound = std::log(c.scenario.lambda_bound_factor);
    rep.add({"X2_lambda_bounded", anchor + ": all lambda_i stay bounded", !tr.fired("lambda_max") && worst <= bound,
             false, std::exp(worst), c.scenario.lambda_bound_factor, "max_i sup_t lambda_i / lambda_i(0)"});
    const auto d = sys.rhs(tr.samples.back().state, tr.samples.back().t);
    double mx = -std::numeric_limits<double>::infinity();
    for (int i : subset) mx = std::max(mx, d.rates[i].dlog_lambda);
    rep.add({"X3_final_rate_nonpositive", anchor + ": all lambda_i stay bounded", mx <= 0.0, false, mx, 0.0,
             "max_i dlog_lambda_i at the final state"});
    (void)m;
}

}  // namespace

ScenarioResult run_exclusions(const RunConfig& c_in, const std::string& sub) {
    if (sub != "mixed" && sub != "off_max" && sub != "tower")
        throw UsageError(fmt::format("unknown exclusion sub-scenario '{}' (expected mixed, off_max or tower)", sub));
    RunConfig c = c_in;
    c.scenario.name = sub;
    const Model m(c);
    const BubbleState y0 = initial_state(c, m);
    const FlowSystem sys = make_system(c, m);
    const auto& cs = m.coeffs;
    const double n = cs.n;
    const int p = y0.p();

    double lam_lo = std::numeric_limits<double>::infinity(), lam_hi = 0.0;
    for (const auto& b : y0.bubbles) {
        lam_lo = std::min(lam_lo, b.lambda());
        lam_hi = std::max(lam_hi, b.lambda());
    }
    std::vector<EventSpec> events{lambda_max_event(c.scenario.lambda_bound_factor * lam_hi),
                                  lambda_min_event(c.scenario.lambda_min_factor * lam_lo),
                                  chart_exit_event(0.99 * m.field.chart_radius())};
    if (p > 1) events.push_back(eps_collision_event(m.kernel, 0.1));

    const bool auto_h = !(c.integrator.t_end > 0.0);
    double t_end = c.integrator.t_end;
    if (auto_h) {
        const auto d0 = sys.rhs(y0, 0.0);
        double rate = 0.0;
        for (const auto& r : d0.rates) rate = std::max(rate, std::abs(r.dlog_lambda));
        // Time to move ln(lambda) by the distance to the lambda_min stop at the initial rate.
        t_end = rate > 0.0 ? 4.0 * std::abs(std::log(c.scenario.lambda_min_factor)) / rate : 1.0;
    }
    Trajectory tr = integrate_until_event(sys, y0, t_end, auto_h, c, events);

    ScenarioResult res;
    auto& rep = res.report;
    rep.scenario = sub;
    fill_common(rep, c, tr);
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);

    if (sub == "mixed") {
        psi_and_bounded_checks(rep, c, m, sys, tr, all, "nonzero weak limit");
    } else if (sub == "off_max") {
        const auto vr = validate_condition(m.field);
        double lap0 = std::numeric_limits<double>::infinity();
        for (const auto& b : y0.bubbles) lap0 = std::min(lap0, m.field.eval_jet(b.a).lap);
        rep.add({"X0_positive_laplacian_at_start", "concentration away from x0 happens where lap K > 0",
                 vr.valid && lap0 > 0.0, false, lap0, 0.0,
                 fmt::format("field valid: {}, q = {}", vr.valid, vr.q())});
        psi_and_bounded_checks(rep, c, m, sys, tr, all, "concentration away from x0");
    } else {
        const auto& pert = c.integrator.pert;
        const double C = c.scenario.C;
        const double eps = c.scenario.theta_eps;
        const double budget = budget_or_inf(pert, 0.0);
        const double kstar = vartheta_quasi_monotonicity(m.modification, 0.05, 4.0, 20001).kappa_star;
        double wsum = 0.0, w = 1.0;
        for (int i = 0; i < p; ++i) wsum += (w *= C);
        const Series th = channel(tr, [](const TrajectorySample& s) { return s.diag.theta; });
        const double slack = (pert.target_log_lambda ? kstar * wsum * budget : 0.0) +
                             10.0 * c.integrator.tol * (1.0 + std::abs(th.front()));
        const auto v = check_lyapunov(th, Direction::nonincreasing, slack);
        rep.add({"T1_theta_nonincreasing", "tower at x0: Theta is nonincreasing", v.passed, false, v.violation, slack,
                 fmt::format("worst step {:.3g} at sample {}", v.worst_step, v.worst_index)});
        const double mx = *std::max_element(th.begin(), th.end());
        rep.add({"T2_theta_bounded", "tower at x0: Theta is bounded", mx <= th.front() + slack, false, mx,
                 th.front() + slack, "sup Theta"});

        // Running integral of the dissipation proxy on {lambda_i |a_i|^5 >= 2 eps}.
        Series I(tr.samples.size(), 0.0);
        auto integrand = [&](const TrajectorySample& s) {
            double out = 0.0;
            const auto& st = s.state;
            for (int i = 0; i < st.p(); ++i) {
                if (s.diag.lam_a5.at(i) < 2.0 * eps) continue;
                const double lam = st.bubbles[i].lambda();
                out += st.bubbles[i].a.squaredNorm() / (lam * lam);
                for (int j = 0; j < st.p(); ++j)
                    if (j != i) out += shadowflow::eps(st, m.kernel, i, j);
            }
            return out;
        };
        double prev = integrand(tr.samples[0]);
        const double f0 = prev;
        for (std::size_t k = 1; k < tr.samples.size(); ++k) {
            const double cur = integrand(tr.samples[k]);
            I[k] = I[k - 1] + 0.5 * (prev + cur) * (tr.samples[k].t - tr.samples[k - 1].t);
            prev = cur;
        }
        const double T = tr.samples.back().t;
        double I75 = 0.0;
        for (std::size_t k = 0; k < tr.samples.size(); ++k)
            if (tr.samples[k].t <= 0.75 * T) I75 = I[k];
        const double total = I.back();
        const double mean_rate = T > 0.0 ? total / T : f0;
        // Tail rate of the integrand relative to its time average.
        const double tail = mean_rate > 0.0 ? prev / mean_rate : 0.0;
        rep.add({"T3_integrability_proxy_converges", "tower at x0: dissipation is time integrable",
                 std::isfinite(total) && tail <= 0.01, false, tail, 0.01,
                 fmt::format("final integrand / mean integrand; total {:.6g}, last-quarter share {:.3g}", total,
                             total > 0.0 ? (total - I75) / total : 0.0)});

        // lambda_max sign inequality where all lambda_i |a_i|^5 <= 4 eps.
        double worst = -std::numeric_limits<double>::infinity();
        int evaluated = 0;
        double t_all_small = std::numeric_limits<double>::infinity();
        const auto al_of = [&](const BubbleState& s) { return equilibrium_alpha(s, m.field, cs); };
        for (const auto& s : tr.samples) {
            const auto& st = s.state;
            bool all_small = true;
            for (int i = 0; i < p; ++i) all_small = all_small && s.diag.lam_a5.at(i) <= 4.0 * eps;
            if (!all_small) continue;
            t_all_small = std::min(t_all_small, s.t);
            int mi = 0;
            for (int i = 1; i < p; ++i)
                if (st.bubbles[i].log_lambda > st.bubbles[mi].log_lambda) mi = i;
            const auto al = al_of(st);
            const auto& bm = st.bubbles[mi];
            const double lam = bm.lambda();
            const double K = m.field.value(bm.a);
            double inter = 0.0;
            for (int j = 0; j < p; ++j)
                if (j != mi) inter += al[j] / al[mi] * shadowflow::eps(st, m.kernel, mi, j);
            const double val = cs.kappa * (4.0 * (n + 2.0) * cs.gamma2 * bm.a.squaredNorm() / (K * lam * lam) -
                                           cs.b_lambda * (n - 2.0) / 4.0 * inter);
            worst = std::max(worst, val * lam * lam);
            ++evaluated;
        }
        rep.add({"T4_lambda_max_inequality", "tower at x0: the largest scale cannot grow", evaluated > 0 && worst <= 0.0,
                 false, worst, 0.0,
                 fmt::format("max of lambda_m^2 * growth bound over {} states with all lambda|a|^5 <= 4 eps",
                             evaluated)});

        Series lmax;
        for (const auto& s : tr.samples) {
            if (s.t < t_all_small) continue;
            double mxl = -std::numeric_limits<double>::infinity();
            for (const auto& b : s.state.bubbles) mxl = std::max(mxl, b.log_lambda);
            lmax.push_back(mxl);
        }
        if (lmax.size() >= 2) {
            const double sl = (pert.target_log_lambda ? budget : 0.0) + 10.0 * c.integrator.tol;
            const auto vv = check_lyapunov(lmax, Direction::nonincreasing, sl);
            rep.add({"T5_lambda_max_nonincreasing", "tower at x0: the largest scale cannot grow", vv.passed, false,
                     vv.violation, sl, fmt::format("{} samples after all lambda|a|^5 <= 4 eps", lmax.size())});
        } else {
            rep.add({"T5_lambda_max_nonincreasing", "tower at x0: the largest scale cannot grow", false, false,
                     std::numeric_limits<double>::quiet_NaN(), 0.0, "region all lambda|a|^5 <= 4 eps never reached"});
        }
        rep.budgets["kappa_star"] = kstar;
    }
    demote_if_nonintegrable(rep, c.integrator.pert);
    res.trajectories.emplace_back("main", std::move(tr));
    return res;
}

ScenarioResult run_scenario(const RunConfig& c) {
    const auto& name = c.scenario.name;
    if (name == "divergence") return run_divergence(c);
    if (name == "compactified") return run_compactified(c);
    if (name == "mixed" || name == "off_max" || name == "tower") return run_exclusions(c, name);
    throw UsageError(fmt::format("unknown scenario '{}'", name));
}

}  // namespace shadowflow
