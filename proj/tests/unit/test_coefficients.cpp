#include "oracles.hpp"
#include "shadowflow/coefficients.hpp"
#include "shadowflow/errors.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <numbers>
#include <random>

using namespace shadowflow;

namespace {
const ConstantKind kAll[] = {ConstantKind::c1, ConstantKind::c2, ConstantKind::c3, ConstantKind::b1};
}

TEST(Coefficients, SphereAreaMatchesOracle) {
    for (int n = 2; n <= 8; ++n) EXPECT_NEAR(sphere_area(n), oracle::sphere_area(n), 1e-13 * oracle::sphere_area(n));
    EXPECT_NEAR(sphere_area(3), 4 * std::numbers::pi, 1e-13);
}

TEST(Coefficients, QuadratureMatchesBetaOracle) {
    for (int n = 3; n <= 5; ++n)
        for (ConstantKind k : kAll) {
            const double q = bubble_constant(k, n), o = oracle::bubble_constant(k, n);
            EXPECT_LT(std::abs(q - o), 1e-6 * o) << to_string(k) << " n=" << n;
        }
}

TEST(Coefficients, KnownValuesInDimensionFive) {
    const double pi = std::numbers::pi;
    EXPECT_NEAR(bubble_constant(ConstantKind::c1, 5), pi * pi * pi / 32, 1e-9);
    EXPECT_NEAR(bubble_constant(ConstantKind::b1, 5), 8 * pi * pi / 15, 1e-9);
    EXPECT_NEAR(bubble_constant(ConstantKind::c1, 5), 0.96895, 1e-3);
    EXPECT_NEAR(bubble_constant(ConstantKind::c2, 5), 0.3634, 1e-3);
    EXPECT_NEAR(bubble_constant(ConstantKind::c3, 5), 0.3634, 1e-3);
    EXPECT_NEAR(bubble_constant(ConstantKind::b1, 5), 5.2638, 1e-3);
}

TEST(Coefficients, QuadratureErrorEstimateIsSmall) {
    for (ConstantKind k : kAll) {
        const auto q = bubble_constant_quad(k, 5);
        EXPECT_LT(q.error, 1e-9 * q.value);
    }
}

TEST(Coefficients, StableUnderDepthDoubling) {
    for (ConstantKind k : kAll) {
        const double a = bubble_constant_quad(k, 5, 8).value, b = bubble_constant_quad(k, 5, 16).value;
        EXPECT_LT(std::abs(a - b), 1e-9 * b) << to_string(k);
    }
}

TEST(Coefficients, UnsupportedDimensionIsUsageError) {
    EXPECT_THROW(bubble_constant(ConstantKind::c1, 2), UsageError);
    EXPECT_THROW(make_coefficients(9), UsageError);
}

TEST(Coefficients, KindStringRoundTrip) {
    for (ConstantKind k : kAll) EXPECT_EQ(constant_kind_from_string(to_string(k)), k);
    EXPECT_THROW(constant_kind_from_string("c9"), UsageError);
}

TEST(Coefficients, DefaultKappa) {
    const auto cs = make_coefficients(5);
    EXPECT_NEAR(cs.kappa, 80.0 * std::pow(oracle::bubble_constant(ConstantKind::c1, 5), 0.4), 1e-9);
    EXPECT_NEAR(cs.kappa, 79.0, 0.05);
    EXPECT_DOUBLE_EQ(cs.Z(), 80.0);
    EXPECT_EQ(cs.gamma1, 1.0);
    EXPECT_EQ(cs.gamma2, 1.0);
    EXPECT_EQ(cs.gamma3, 3.0);
    EXPECT_EQ(cs.gamma4, 1.0);
}

TEST(Coefficients, Gamma2OverrideForcesGamma3) {
    CoefficientOverrides o;
    o.gamma2 = 0.5;
    EXPECT_DOUBLE_EQ(make_coefficients(5, o).gamma3, 1.5);
}

TEST(Coefficients, InconsistentGamma3IsRejected) {
    CoefficientOverrides o;
    o.gamma3 = 2.0;
    try {
        make_coefficients(5, o);
        FAIL() << "expected UsageError";
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("gamma3 = 3*gamma2"), std::string::npos);
    }
    o.gamma2 = 2.0 / 3.0;
    EXPECT_NO_THROW(make_coefficients(5, o));
}

TEST(Coefficients, NonPositiveOverridesAreRejected) {
    CoefficientOverrides o;
    o.gamma1 = 0.0;
    EXPECT_THROW(make_coefficients(5, o), UsageError);
    o = {};
    o.kappa = -1.0;
    EXPECT_THROW(make_coefficients(5, o), UsageError);
    o = {};
    o.b_a = std::nan("");
    EXPECT_THROW(make_coefficients(5, o), UsageError);
}

TEST(Coefficients, CancellationIdentitiesHoldForRandomSets) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 20.0);
    for (int t = 0; t < 200; ++t) {
        CoefficientOverrides o;
        o.gamma2 = u(rng);
        const auto cs = make_coefficients(5, o);
        const double g2 = cs.gamma2, g3 = cs.gamma3;
        EXPECT_NEAR(4 * 7 * g2 - 5 * 4 * g3, -32 * g2, 4 * std::numeric_limits<double>::epsilon() * 60 * g2);
        EXPECT_NEAR(-16 * 49 * g2 + 4 * 8 * 7 * g3, -112 * g2, 4 * std::numeric_limits<double>::epsilon() * 1600 * g2);
        EXPECT_LT(-16 * 49 * g2 + 4 * 8 * 7 * g3, 0.0);
    }
}
