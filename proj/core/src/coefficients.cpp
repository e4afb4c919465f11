#include "shadowflow/coefficients.hpp"

#include "shadowflow/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include <cmath>
#include <functional>

namespace shadowflow {

std::string to_string(ConstantKind k) {
    switch (k) {
        case ConstantKind::c1: return "c1";
        case ConstantKind::c2: return "c2";
        case ConstantKind::c3: return "c3";
        case ConstantKind::b1: return "b1";
    }
    return "?";
}

ConstantKind constant_kind_from_string(const std::string& s) {
    if (s == "c1") return ConstantKind::c1;
    if (s == "c2") return ConstantKind::c2;
    if (s == "c3") return ConstantKind::c3;
    if (s == "b1") return ConstantKind::b1;
    throw UsageError(fmt::format("unknown constant '{}' (expected c1, c2, c3 or b1)", s));
}

double sphere_area(int n) {
    const double pi = boost::math::constants::pi<double>();
    return 2.0 * std::pow(pi, 0.5 * n) / boost::math::tgamma(0.5 * n);
}

QuadratureResult bubble_constant_quad(ConstantKind kind, int n, unsigned max_depth) {
    if (n < 3 || n > 5) throw UsageError(fmt::format("bubble constants supported for n in {{3,4,5}}, got {}", n));
    const double nn = n;
    std::function<double(double)> f;
    double prefactor = 1.0;
    switch (kind) {
        case ConstantKind::c1:
            f = [nn](double r) { return std::pow(r, nn - 1) * std::pow(1 + r * r, -nn); };
            break;
        case ConstantKind::c2:
            prefactor = (nn - 2) * (nn - 2) / 4.0;
            f = [nn](double r) {
                const double q = r * r - 1.0;
                return std::pow(r, nn - 1) * q * q * std::pow(1 + r * r, -(nn + 2));
            };
            break;
        case ConstantKind::c3:
            prefactor = (nn - 2) * (nn - 2) / nn;
            f = [nn](double r) { return std::pow(r, nn + 1) * std::pow(1 + r * r, -(nn + 2)); };
            break;
        case ConstantKind::b1:
            f = [nn](double r) { return std::pow(r, nn - 1) * std::pow(1 + r * r, -0.5 * (nn + 2)); };
            break;
    }
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double v = gauss_kronrod<double, 61>::integrate(f, 0.0, inf, max_depth, 1e-14, &err);
    const double scale = prefactor * sphere_area(n);
    return {scale * v, scale * err};
}

double bubble_constant(ConstantKind kind, int n) { return bubble_constant_quad(kind, n).value; }

CoefficientSet make_coefficients(int n, const CoefficientOverrides& o) {
    CoefficientSet cs;
    cs.n = n;
    cs.c1 = bubble_constant(ConstantKind::c1, n);
    cs.c2 = bubble_constant(ConstantKind::c2, n);
    cs.c3 = bubble_constant(ConstantKind::c3, n);
    cs.b1 = bubble_constant(ConstantKind::b1, n);
    cs.kappa = cs.Z() * std::pow(cs.c1, 2.0 / n);

    auto apply = [](const std::optional<double>& v, double& dst, const char* name) {
        if (!v) return;
        if (!(*v > 0.0) || !std::isfinite(*v))
            throw UsageError(fmt::format("coefficient override {}={} must be positive", name, *v));
        dst = *v;
    };
    apply(o.gamma1, cs.gamma1, "gamma1");
    apply(o.gamma2, cs.gamma2, "gamma2");
    apply(o.gamma4, cs.gamma4, "gamma4");
    apply(o.gamma_nabla_lap, cs.gamma_nabla_lap, "gamma_nabla_lap");
    apply(o.b_lambda, cs.b_lambda, "b_lambda");
    apply(o.b_a, cs.b_a, "b_a");
    apply(o.kappa, cs.kappa, "kappa");

    cs.gamma3 = 3.0 * cs.gamma2;
    if (o.gamma3) {
        if (!(*o.gamma3 > 0.0)) throw UsageError(fmt::format("coefficient override gamma3={} must be positive", *o.gamma3));
        if (std::abs(*o.gamma3 - cs.gamma3) > 1e-12 * cs.gamma3)
            throw UsageError(fmt::format("gamma3={} violates the constraint gamma3 = 3*gamma2 (= {})", *o.gamma3,
                                         cs.gamma3));
    }
    return cs;
}

}  // namespace shadowflow
