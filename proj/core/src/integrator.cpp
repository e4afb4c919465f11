#include "shadowflow/integrator.hpp"

#include "shadowflow/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace shadowflow {

namespace odeint = boost::numeric::odeint;

std::string to_string(PertFamily f) {
    switch (f) {
        case PertFamily::off: return "off";
        case PertFamily::exp_decay: return "exp_decay";
        case PertFamily::power: return "power";
        case PertFamily::nonintegrable: return "nonintegrable";
    }
    return "?";
}

PertFamily pert_family_from_string(const std::string& s) {
    if (s == "off") return PertFamily::off;
    if (s == "exp_decay") return PertFamily::exp_decay;
    if (s == "power") return PertFamily::power;
    if (s == "nonintegrable") return PertFamily::nonintegrable;
    throw UsageError(fmt::format("unknown perturbation family '{}'", s));
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::t_end: return "t_end";
        case Termination::event: return "event";
        case Termination::wall_budget: return "wall_budget";
        case Termination::max_steps: return "max_steps";
    }
    return "?";
}

void PerturbationModel::validate() const {
    if (family == PertFamily::off) return;
    if (!(c >= 0.0)) throw UsageError("perturbation amplitude must be nonnegative");
    if ((family == PertFamily::exp_decay || family == PertFamily::power) && !(rate > 0.0))
        throw UsageError("perturbation decay rate must be positive");
}

double PerturbationModel::value(double t) const {
    switch (family) {
        case PertFamily::off: return 0.0;
        case PertFamily::exp_decay: return c * std::exp(-rate * t);
        case PertFamily::power: return c * std::pow(1.0 + t, -(1.0 + rate));
        case PertFamily::nonintegrable: return c / (1.0 + t);
    }
    return 0.0;
}

double PerturbationModel::channel_weight() const {
    double w = 0.0;
    if (target_log_lambda) w += 1.0;
    if (target_log_alpha) w += 1.0;
    if (target_a) w += 2.0;
    return w;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

double PerturbationModel::sign(Channel ch, double t) const {
    if (policy == SignPolicy::adversarial) {
        switch (ch) {
            case Channel::log_alpha: return sign_log_alpha;
            case Channel::log_lambda: return sign_log_lambda;
            case Channel::a: return sign_a;
        }
    }
    // Independent signs at nodes spaced 0.05 in ln(1+t), blended by a quintic
    // smoothstep so the perturbed field stays smooth for the stepper.
    const double u = std::log1p(std::max(t, 0.0)) / 0.05;
    const double fl = std::floor(u);
    const auto node = static_cast<std::uint64_t>(fl);
    auto node_sign = [&](std::uint64_t k) {
        const std::uint64_t h = splitmix64(seed ^ splitmix64(k * 4 + static_cast<std::uint64_t>(ch)));
        return (h & 1ULL) ? 1.0 : -1.0;
    };
    const double x = u - fl;
    const double w = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    return (1.0 - w) * node_sign(node) + w * node_sign(node + 1);
}

double pert_budget(const PerturbationModel& p, double t0, double t1) {
    if (t1 < t0) throw UsageError("pert_budget requires t1 >= t0");
    switch (p.family) {
        case PertFamily::off: return 0.0;
        case PertFamily::exp_decay: {
            const double tail = std::isinf(t1) ? 0.0 : std::exp(-p.rate * t1);
            return p.c / p.rate * (std::exp(-p.rate * t0) - tail);
        }
        case PertFamily::power: {
            const double tail = std::isinf(t1) ? 0.0 : std::pow(1.0 + t1, -p.rate);
            return p.c / p.rate * (std::pow(1.0 + t0, -p.rate) - tail);
        }
        case PertFamily::nonintegrable:
            if (std::isinf(t1)) return std::numeric_limits<double>::infinity();
            return p.c * std::log((1.0 + t1) / (1.0 + t0));
    }
    return 0.0;
}

EventSpec lambda_max_event(double lambda_max) {
    const double l = std::log(lambda_max);
    return {"lambda_max", [l](const BubbleState& s) {
                double m = -std::numeric_limits<double>::infinity();
                for (const auto& b : s.bubbles) m = std::max(m, b.log_lambda - l);
                return m;
            }, true};
}

EventSpec lambda_min_event(double lambda_min) {
    const double l = std::log(lambda_min);
    return {"lambda_min", [l](const BubbleState& s) {
                double m = -std::numeric_limits<double>::infinity();
                for (const auto& b : s.bubbles) m = std::max(m, l - b.log_lambda);
                return m;
            }, true};
}

EventSpec lam_a2_enter_below_event(double threshold, bool terminal) {
    const double l = std::log(threshold);
    return {"lam_a2_below", [l](const BubbleState& s) {
                double m = -std::numeric_limits<double>::infinity();
                for (const auto& b : s.bubbles) m = std::max(m, l - (b.log_lambda + std::log(b.a.squaredNorm())));
                return m;
            }, terminal};
}

EventSpec lam_a2_exit_above_event(double threshold, bool terminal) {
    const double l = std::log(threshold);
    return {"lam_a2_above", [l](const BubbleState& s) {
                double m = -std::numeric_limits<double>::infinity();
                for (const auto& b : s.bubbles) m = std::max(m, b.log_lambda + std::log(b.a.squaredNorm()) - l);
                return m;
            }, terminal};
}

EventSpec eps_collision_event(const GreenKernel& kernel, double threshold) {
    return {"eps_collision", [kernel, threshold](const BubbleState& s) {
                double m = -threshold;
                for (int i = 0; i < s.p(); ++i)
                    for (int j = i + 1; j < s.p(); ++j) m = std::max(m, eps(s, kernel, i, j) - threshold);
                return m;
            }, true};
}

EventSpec chart_exit_event(double radius) {
    return {"chart_exit", [radius](const BubbleState& s) {
                double m = -std::numeric_limits<double>::infinity();
                for (const auto& b : s.bubbles) m = std::max(m, b.a.norm() - radius);
                return m;
            }, true};
}

bool Trajectory::fired(const std::string& event_name) const {
    return std::any_of(events.begin(), events.end(), [&](const EventRecord& e) { return e.name == event_name; });
}

std::vector<double> pack(const BubbleState& s) {
    const int n = s.dim();
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(s.p()) * (n + 2));
    for (const auto& b : s.bubbles) {
        y.push_back(std::log(b.alpha));
        y.push_back(b.log_lambda);
        for (int k = 0; k < n; ++k) y.push_back(b.a[k]);
    }
    return y;
}

void unpack(const std::vector<double>& y, BubbleState& s) {
    const int n = s.dim();
    std::size_t o = 0;
    for (auto& b : s.bubbles) {
        b.alpha = std::exp(y[o]);
        b.log_lambda = y[o + 1];
        for (int k = 0; k < n; ++k) b.a[k] = y[o + 2 + k];
        o += n + 2;
    }
}

std::vector<double> pack(const StateDerivative& d) {
    std::vector<double> y;
    for (const auto& r : d.rates) {
        y.push_back(r.dlog_alpha);
        y.push_back(r.dlog_lambda);
        for (Eigen::Index k = 0; k < r.da.size(); ++k) y.push_back(r.da[k]);
    }
    return y;
}

namespace {

using State = std::vector<double>;

std::string dump_state(double t, double dt, const BubbleState& s) {
    std::string out = fmt::format("t={:.17g} dt={:.17g}", t, dt);
    for (int i = 0; i < s.p(); ++i) {
        const auto& b = s.bubbles[i];
        out += fmt::format(" | bubble {}: alpha={:.17g} ln_lambda={:.17g} a=[", i, b.alpha, b.log_lambda);
        for (Eigen::Index k = 0; k < b.a.size(); ++k) out += fmt::format("{}{:.17g}", k ? " " : "", b.a[k]);
        out += "]";
    }
    return out;
}

struct Hermite {
    double t0, t1;
    const State *y0, *f0, *y1, *f1;

    void eval(double t, State& out) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        out.resize(y0->size());
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = h00 * (*y0)[k] + h10 * h * (*f0)[k] + h01 * (*y1)[k] + h11 * h * (*f1)[k];
    }
};

}  // namespace

Trajectory integrate(const FlowSystem& system, const BubbleState& y0, double t_end, double tol,
                     const PerturbationModel& pert, const std::vector<EventSpec>& events,
                     const IntegratorOptions& opt) {
    if (!(tol > 0.0)) throw UsageError("integrator tolerance must be positive");
    if (!(t_end > 0.0)) throw UsageError("integration end time must be positive");
    if (!system.rhs) throw UsageError("flow system has no right-hand side");
    y0.validate();
    pert.validate();

    const auto wall_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    };

    Trajectory traj;
    BubbleState work = y0;
    if (system.constrain) system.constrain(work);
    const int n = work.dim();
    const std::size_t stride = static_cast<std::size_t>(n) + 2;

    auto rhs = [&](const State& x, State& dxdt, double t) {
        unpack(x, work);
        ++traj.stats.rhs_evals;
        dxdt = pack(system.rhs(work, t));
        if (pert.family != PertFamily::off) {
            const double mag = pert.value(t);
            for (std::size_t o = 0; o < x.size(); o += stride) {
                if (pert.target_log_alpha)
                    dxdt[o] += pert.sign(PerturbationModel::Channel::log_alpha, t) * mag;
                if (pert.target_log_lambda)
                    dxdt[o + 1] += pert.sign(PerturbationModel::Channel::log_lambda, t) * mag;
                if (pert.target_a) {
                    const double sa = pert.sign(PerturbationModel::Channel::a, t) * mag;
                    for (int k = 0; k < n; ++k) dxdt[o + 2 + k] += sa * x[o + 2 + k];
                }
            }
        }
        for (double v : dxdt)
            if (!std::isfinite(v)) throw RhsError(fmt::format("non-finite right-hand side at t={:.17g}", t));
    };

    auto record = [&](double t, const State& x) {
        BubbleState s = y0;
        unpack(x, s);
        TrajectorySample smp;
        smp.t = t;
        smp.state = s;
        if (system.diagnose) smp.diag = system.diagnose(t, s);
        smp.diag.t = t;
        traj.samples.push_back(std::move(smp));
    };

    auto event_values = [&](const State& x) {
        BubbleState s = y0;
        unpack(x, s);
        std::vector<double> v(events.size());
        for (std::size_t e = 0; e < events.size(); ++e) v[e] = events[e].fn(s);
        return v;
    };

    State x = pack(work);
    State dxdt;
    double t = 0.0;
    rhs(x, dxdt, t);
    record(t, x);
    std::vector<double> ev_prev = event_values(x);

    const double time_scale = opt.time_scale > 0.0 ? opt.time_scale : t_end;
    double dt = opt.dt0;
    if (!(dt > 0.0)) {
        double fx = 0.0, sx = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double sc = tol + tol * std::abs(x[k]);
            fx = std::max(fx, std::abs(dxdt[k]) / sc);
            sx = std::max(sx, std::abs(x[k]) / sc);
        }
        dt = fx > 0.0 ? 0.01 * std::max(sx, 1.0) / fx : t_end;
    }
    dt = std::min(dt, t_end);

    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    auto sys = [&](const State& xx, State& dd, double tt) { rhs(xx, dd, tt); };

    State x_prev, f_prev, xi;
    std::string last_rhs_failure;
    while (t < t_end) {
        if (traj.stats.accepted >= opt.max_steps) {
            traj.termination = Termination::max_steps;
            break;
        }
        if (opt.wall_budget_s > 0.0 && elapsed() > opt.wall_budget_s) {
            traj.termination = Termination::wall_budget;
            break;
        }
        if (t_end - t <= 1e-15 * time_scale) break;
        if (opt.max_dt > 0.0) dt = std::min(dt, opt.max_dt);
        dt = std::min(dt, t_end - t);
        if (dt < 1e-14 * time_scale) {
            if (!last_rhs_failure.empty()) throw RhsError(last_rhs_failure);
            BubbleState s = y0;
            unpack(x, s);
            throw StiffnessError(fmt::format("step size underflow (dt={:.3g}) at t={:.17g}", dt, t),
                                 dump_state(t, dt, s));
        }
        x_prev = x;
        f_prev = dxdt;
        const double t_prev = t;
        const double dt_try = dt;
        odeint::controlled_step_result res;
        try {
            res = stepper.try_step(sys, x, dxdt, t, dt);
        } catch (const DomainError&) {
            x = x_prev;
            dxdt = f_prev;
            t = t_prev;
            dt = 0.5 * dt_try;
            ++traj.stats.rejected;
            ++traj.stats.domain_rejections;
            continue;
        } catch (const RhsError& e) {
            last_rhs_failure = e.what();
            x = x_prev;
            dxdt = f_prev;
            t = t_prev;
            dt = 0.5 * dt_try;
            ++traj.stats.rejected;
            continue;
        }
        if (res == odeint::fail) {
            ++traj.stats.rejected;
            continue;
        }
        const double h = t - t_prev;
        last_rhs_failure.clear();
        ++traj.stats.accepted;
        traj.stats.min_dt = std::min(traj.stats.min_dt, h);
        traj.stats.max_dt = std::max(traj.stats.max_dt, h);

        // Event location on the cubic Hermite interpolant of the step.
        const std::vector<double> ev_now = event_values(x);
        int hit = -1;
        double t_hit = t;
        const Hermite herm{t_prev, t, &x_prev, &f_prev, &x, &dxdt};
        for (std::size_t e = 0; e < events.size(); ++e) {
            if (!(ev_prev[e] < 0.0 && ev_now[e] >= 0.0)) continue;
            auto g = [&](double tt) {
                herm.eval(tt, xi);
                BubbleState s = y0;
                unpack(xi, s);
                return events[e].fn(s);
            };
            double lo = t_prev, hi = t;
            double glo = ev_prev[e], ghi = ev_now[e];
            double root = hi;
            if (ghi != 0.0) {
                boost::uintmax_t iters = 100;
                try {
                    auto r = boost::math::tools::toms748_solve(
                        g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(50), iters);
                    root = r.second;
                } catch (const std::exception&) {
                    root = hi;
                }
            }
            if (events[e].terminal) {
                if (hit < 0 || root < t_hit) {
                    hit = static_cast<int>(e);
                    t_hit = root;
                }
            } else {
                traj.events.push_back({root, events[e].name});
            }
        }

        if (hit >= 0) {
            State xe;
            herm.eval(t_hit, xe);
            if (t_hit > t_prev) {
                BubbleState s = y0;
                unpack(xe, s);
                if (system.constrain) system.constrain(s);
                record(t_hit, pack(s));
            }
            traj.events.push_back({t_hit, events[hit].name});
            traj.termination = Termination::event;
            traj.terminal_event = events[hit].name;
            break;
        }

        if (system.constrain) {
            unpack(x, work);
            system.constrain(work);
            x = pack(work);
            rhs(x, dxdt, t);
        }
        for (double v : x)
            if (!std::isfinite(v)) throw RhsError(fmt::format("non-finite state at t={:.17g}", t));
        record(t, x);
        ev_prev = event_values(x);
    }
    if (traj.termination == Termination::t_end && t < t_end) traj.termination = Termination::max_steps;
    traj.stats.wall_seconds = elapsed();
    return traj;
}

}  // namespace shadowflow
