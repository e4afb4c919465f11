#pragma once

#include "shadowflow/coefficients.hpp"
#include "shadowflow/curvature_field.hpp"

#include <functional>

namespace oracle {

// Closed forms of the bubble constants through Beta functions.
double sphere_area(int n);
double bubble_constant(shadowflow::ConstantKind kind, int n);

struct ReducedDivergence {
    double log_lambda = 0.0;
    double a2 = 0.0;  // |a|^2
};

// Single bubble on the quartic field with a along a fixed ray, in (ln lambda, |a|^2):
//   d ln(lambda)/dt = kappa (4(n+2) g2 s / (K lambda^2) - g1 H / lambda^(n-2))
//   ds/dt = -2 kappa (4 g3 s^2 / (K lambda^2) + 8(n+2) gnl s / (K lambda^4)),  K = 1 - s^2
// integrated by an eighth-order Runge-Kutta-Fehlberg method at tolerance tol.
ReducedDivergence integrate_reduced_divergence(const shadowflow::CoefficientSet& cs, double H,
                                               ReducedDivergence y0, double t_end, double tol);

// lambda(t)^3 = lambda0^3 - 3 kappa g1 H t for a single bubble at the maximum (n = 5).
double pure_mass_log_lambda(const shadowflow::CoefficientSet& cs, double H, double lambda0, double t);

// Positive weak limit, p = 1 at the maximum (n = 5):
// lambda^{3/2}(t) = lambda0^{3/2} - 1.5 kappa g1 (amp omega / alpha1) t.
double mixed_log_lambda(const shadowflow::CoefficientSet& cs, double amp_omega_over_alpha, double lambda0, double t);

// Central difference of f at x along unit direction e with step h.
double central_difference(const std::function<double(const shadowflow::Vec&)>& f, const shadowflow::Vec& x,
                          const shadowflow::Vec& e, double h);

}  // namespace oracle
