#include "helpers.hpp"
#include "shadowflow/diagnostics.hpp"
#include "shadowflow/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

using namespace shadowflow;
using testing_helpers::point;

namespace {

BubbleState single(double lambda, const Vec& a) {
    BubbleState s;
    s.bubbles = {{1.0, std::log(lambda), a}};
    return s;
}

}  // namespace

TEST(Theta, ZeroWhenAllBelowThreshold) {
    ModificationConfig m;
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        auto s = testing_helpers::random_state(rng, 3);
        for (auto& b : s.bubbles) b.a *= std::pow(0.9e-3 / (b.lambda() * std::pow(b.a.norm(), 5.0) + 1e-300), 0.2);
        EXPECT_EQ(theta(s, m, 10.0, 1e-3), 0.0);
    }
}

TEST(Theta, SingleBubbleExample) {
    ModificationConfig m;
    const double eps = 1e-3, target = 2.0 * std::numbers::e * eps;
    const double r = 0.1;
    const auto s = single(target / std::pow(r, 5.0), point(5, {r}));
    EXPECT_NEAR(theta(s, m, 10.0, eps), 10.0 * (1.0 + std::log(2.0)), 1e-12);
}

TEST(Theta, WeightsFollowAscendingOrder) {
    ModificationConfig m;
    const double eps = 1e-3;
    BubbleState s;
    s.bubbles = {{1.0, std::log(3 * eps / 1e-5), point(5, {0.1})}, {1.0, std::log(5 * eps / 1e-5), point(5, {-0.1})}};
    EXPECT_NEAR(theta(s, m, 10.0, eps), 10 * std::log(3.0) + 100 * std::log(5.0), 1e-11);
}

TEST(Theta, PermutationInvariantAndNonnegative) {
    ModificationConfig m;
    std::mt19937_64 rng(2);
    for (int t = 0; t < 200; ++t) {
        auto s = testing_helpers::random_state(rng, 4, 5, std::log(10.0), std::log(1e6), 0.3);
        const double v = theta(s, m, 10.0, 1e-3);
        EXPECT_GE(v, 0.0);
        std::shuffle(s.bubbles.begin(), s.bubbles.end(), rng);
        EXPECT_DOUBLE_EQ(theta(s, m, 10.0, 1e-3), v);
    }
}

TEST(Theta, InvalidWeightBase) {
    EXPECT_THROW(theta(single(10, point(5, {0.1})), ModificationConfig{}, 1.0, 1e-3), UsageError);
}

TEST(Psi, Examples) {
    EXPECT_NEAR(psi(single(std::numbers::e, point(5, {})), 10.0), -10.0, 1e-14);
    BubbleState s;
    for (int i = 0; i < 3; ++i) s.bubbles.push_back({1.0, std::log(50.0), point(5, {0.1 * i})});
    EXPECT_NEAR(psi(s, 10.0), -(10 + 100 + 1000) * std::log(50.0), 1e-10);
}

TEST(Psi, OrderedByInverseScaleDescending) {
    BubbleState s;
    s.bubbles = {{1.0, 3.0, point(5, {})}, {1.0, 1.0, point(5, {})}};
    EXPECT_DOUBLE_EQ(psi(s, 10.0), -10.0 * 1.0 - 100.0 * 3.0);
    EXPECT_DOUBLE_EQ(psi(s, 10.0, {0}), -30.0);
}

TEST(Psi, DecreasesWithoutBoundAsOneScaleGrows) {
    BubbleState s;
    s.bubbles = {{1.0, 2.0, point(5, {})}, {1.0, 4.0, point(5, {})}};
    double prev = psi(s, 10.0);
    for (int k = 0; k < 50; ++k) {
        s.bubbles[0].log_lambda += 1.0;
        const double v = psi(s, 10.0);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, -1000.0);
}

TEST(Psi, EmptySubsetIsUsageError) { EXPECT_THROW(psi(single(2, point(5, {})), 10.0, {}), UsageError); }

TEST(MassScaleInvariant, Examples) {
    CurvatureField f;
    EXPECT_NEAR(mass_scale_invariant(single(100, point(5, {0.1})), f, 0), 28.0, 1e-12);
    EXPECT_NEAR(mass_scale_invariant(single(200, point(5, {0.0, 0.1})), f, 0), 56.0, 1e-12);
    EXPECT_THROW(mass_scale_invariant(single(100, point(5, {})), f, 0), DomainError);
}

TEST(MassScaleInvariant, NondecreasingAlongUnperturbedDivergenceFlow) {
    CurvatureField f;
    GreenKernel k;
    const auto cs = make_coefficients(5);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 2000; ++t) {
        const Vec a = testing_helpers::random_in_ball(rng, 5, 1e-3, 0.05);
        const double s2 = std::exp(std::uniform_real_distribution<double>(std::log(20.0), std::log(1e4))(rng));
        const double lam = s2 / a.squaredNorm();
        const auto d = rhs_zero_weak_limit(single(lam, a), f, k, cs);
        const double rate = d.rates[0].dlog_lambda + 2.0 * a.dot(d.rates[0].da) / a.squaredNorm();
        EXPECT_GE(rate, 0.0);
    }
}

TEST(EnergySurrogate, SingleBubbleValues) {
    CurvatureField f;
    const auto cs = make_coefficients(5);
    EXPECT_NEAR(energy_surrogate(single(10, point(5, {})), f, cs), cs.kappa, 1e-12);
    const Vec a = point(5, {0.5});
    EXPECT_NEAR(energy_surrogate(single(10, a), f, cs), cs.kappa / std::pow(1 - 0.0625, 0.6), 1e-12);
}

TEST(SampleDiagnostics, FieldsAreConsistent) {
    CurvatureField f;
    GreenKernel k;
    const auto cs = make_coefficients(5);
    ModificationConfig m;
    std::mt19937_64 rng(4);
    auto s = testing_helpers::random_state(rng, 3);
    s.bubbles[1].a.setZero();
    const auto d = sample_diagnostics(2.5, s, f, k, cs, m, {10.0, 1e-3});
    EXPECT_EQ(d.t, 2.5);
    ASSERT_EQ(d.eps_pairs.size(), 3u);
    EXPECT_EQ(d.eps_pairs[2], eps(s, k, 1, 2));
    EXPECT_TRUE(std::isnan(d.mass_inv[1]));
    EXPECT_NEAR(d.mass_inv[0], 28.0 * d.lam_a2[0], 1e-12 * d.mass_inv[0]);
    EXPECT_EQ(d.theta, theta(s, m, 10.0, 1e-3));
    EXPECT_EQ(d.psi, psi(s, 10.0));
}

TEST(CheckLyapunov, Examples) {
    const auto c = check_lyapunov({1.0, 1.0, 1.0}, Direction::nonincreasing, 0.0);
    EXPECT_TRUE(c.passed);
    EXPECT_EQ(c.violation, 0.0);
    const auto v = check_lyapunov({1.0, 2.0, 4.0}, Direction::nonincreasing, 0.0);
    EXPECT_FALSE(v.passed);
    EXPECT_DOUBLE_EQ(v.violation, 3.0);
    EXPECT_DOUBLE_EQ(v.worst_step, 2.0);
    EXPECT_EQ(v.worst_index, 2u);
    EXPECT_TRUE(check_lyapunov({1.0, 2.0, 4.0}, Direction::nondecreasing, 0.0).passed);
}

TEST(CheckLyapunov, SlackAbsorbsSmallViolations) {
    EXPECT_TRUE(check_lyapunov({0.0, 0.5, 0.4, 0.6}, Direction::nonincreasing, 0.7).passed);
    EXPECT_FALSE(check_lyapunov({0.0, 0.5, 0.4, 0.6}, Direction::nonincreasing, 0.69).passed);
}

TEST(CheckLyapunov, InvalidInput) {
    EXPECT_THROW(check_lyapunov({1.0}, Direction::nonincreasing, 0.0), UsageError);
    EXPECT_THROW(check_lyapunov({1.0, 2.0}, Direction::nonincreasing, -1.0), UsageError);
}
