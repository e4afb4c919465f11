#pragma once

#include "shadowflow/diagnostics.hpp"
#include "shadowflow/shadow_dynamics.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace shadowflow {

enum class PertFamily { off, exp_decay, power, nonintegrable };
enum class SignPolicy { adversarial, random };

std::string to_string(PertFamily f);
PertFamily pert_family_from_string(const std::string& s);

// Explicit stand-in for the quadratic error terms of the reduced flow.
//   exp_decay:     c exp(-rate t)
//   power:         c (1+t)^-(1+rate)
//   nonintegrable: c / (1+t)
struct PerturbationModel {
    PertFamily family = PertFamily::off;
    double c = 0.0;
    double rate = 1.0;
    SignPolicy policy = SignPolicy::adversarial;
    std::uint64_t seed = 0;

    bool target_log_lambda = true;
    bool target_a = false;
    bool target_log_alpha = false;

    // Adversarial signs, chosen by the scenario. For the a-channel +1 is outward.
    double sign_log_lambda = -1.0;
    double sign_a = 1.0;
    double sign_log_alpha = 1.0;

    double value(double t) const;
    bool integrable() const { return family != PertFamily::nonintegrable; }
    // Sum of channel weights: 1 per logarithmic channel, 2 for the center channel.
    double channel_weight() const;

    enum class Channel { log_alpha, log_lambda, a };
    // Adversarial: the fixed sign. Random: a smooth seeded function of t with values in [-1, 1].
    double sign(Channel ch, double t) const;

    void validate() const;
};

// Closed-form integral of pert over [t0, t1]; t1 may be +inf.
double pert_budget(const PerturbationModel& pert, double t0, double t1 = std::numeric_limits<double>::infinity());

struct EventSpec {
    std::string name;
    // The event fires when fn crosses from negative to nonnegative.
    std::function<double(const BubbleState&)> fn;
    bool terminal = true;
};

EventSpec lambda_max_event(double lambda_max);
EventSpec lambda_min_event(double lambda_min);
EventSpec lam_a2_enter_below_event(double threshold, bool terminal = false);
EventSpec lam_a2_exit_above_event(double threshold, bool terminal = false);
EventSpec eps_collision_event(const GreenKernel& kernel, double threshold);
EventSpec chart_exit_event(double radius);

struct FlowSystem {
    std::function<StateDerivative(const BubbleState&, double)> rhs;
    std::function<void(BubbleState&)> constrain;                         // optional
    std::function<DiagnosticSample(double, const BubbleState&)> diagnose;  // optional
};

struct IntegratorOptions {
    double dt0 = 0.0;              // 0 selects an initial step from the rhs scale
    double time_scale = 0.0;       // 0 uses t_end; step underflow is judged against it
    double wall_budget_s = 0.0;    // 0 disables
    double max_dt = 0.0;           // 0 disables; bounds the sample spacing
    std::size_t max_steps = 20'000'000;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t domain_rejections = 0;
    std::size_t rhs_evals = 0;
    double min_dt = std::numeric_limits<double>::infinity();
    double max_dt = 0.0;
    double wall_seconds = 0.0;
};

enum class Termination { t_end, event, wall_budget, max_steps };
std::string to_string(Termination t);

struct TrajectorySample {
    double t = 0.0;
    BubbleState state;
    DiagnosticSample diag;
};

struct EventRecord {
    double t = 0.0;
    std::string name;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    Termination termination = Termination::t_end;
    std::string terminal_event;
    std::vector<EventRecord> events;
    StepStats stats;

    const TrajectorySample& back() const { return samples.back(); }
    bool fired(const std::string& event_name) const;
};

// Packed layout per bubble: [ln alpha, ln lambda, a_1..a_n].
std::vector<double> pack(const BubbleState& s);
void unpack(const std::vector<double>& y, BubbleState& s);
std::vector<double> pack(const StateDerivative& d);

Trajectory integrate(const FlowSystem& system, const BubbleState& y0, double t_end, double tol,
                     const PerturbationModel& pert = {}, const std::vector<EventSpec>& events = {},
                     const IntegratorOptions& options = {});

}  // namespace shadowflow
