#pragma once

#include <optional>
#include <string>

namespace shadowflow {

enum class ConstantKind { c1, c2, c3, b1 };

std::string to_string(ConstantKind k);
ConstantKind constant_kind_from_string(const std::string& s);

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
};

// Surface area of the unit sphere S^{n-1}.
double sphere_area(int n);

// Radial reduction of the bubble integral, adaptive Gauss-Kronrod on [0, inf).
QuadratureResult bubble_constant_quad(ConstantKind kind, int n, unsigned max_depth = 15);
double bubble_constant(ConstantKind kind, int n);

struct CoefficientOverrides {
    std::optional<double> gamma1, gamma2, gamma3, gamma4, gamma_nabla_lap, b_lambda, b_a, kappa;
};

struct CoefficientSet {
    int n = 5;
    double c1 = 0, c2 = 0, c3 = 0, b1 = 0;
    double gamma1 = 1, gamma2 = 1, gamma3 = 3, gamma4 = 1, gamma_nabla_lap = 1;
    double b_lambda = 1, b_a = 1;
    double kappa = 0;

    // 4n(n-1)
    double Z() const noexcept { return 4.0 * n * (n - 1.0); }
};

CoefficientSet make_coefficients(int n, const CoefficientOverrides& overrides = {});

}  // namespace shadowflow
