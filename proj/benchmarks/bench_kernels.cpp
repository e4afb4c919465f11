#include "shadowflow/coefficients.hpp"
#include "shadowflow/config.hpp"
#include "shadowflow/curvature_field.hpp"
#include "shadowflow/interaction_kernel.hpp"
#include "shadowflow/quadverify.hpp"
#include "shadowflow/shadow_dynamics.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace shadowflow;

namespace {

BubbleState tower(int p) {
    BubbleState s;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int i = 0; i < p; ++i) {
        Vec a(5);
        for (int k = 0; k < 5; ++k) a[k] = u(rng);
        s.bubbles.push_back({1.0, std::log(10.0) * (2 + i), a});
    }
    return s;
}

void BM_FieldJet(benchmark::State& st) {
    CurvatureField f(5, 1.0, {{Vec::Constant(5, 0.2), -0.04, 0.15}});
    Vec x = Vec::Constant(5, 0.1);
    for (auto _ : st) benchmark::DoNotOptimize(f.eval_jet(x));
}
BENCHMARK(BM_FieldJet);

void BM_PairTerms(benchmark::State& st) {
    GreenKernel k(5, 0.5);
    const auto s = tower(2);
    for (auto _ : st) benchmark::DoNotOptimize(pair_terms(s, k, 0, 1));
}
BENCHMARK(BM_PairTerms);

void BM_RhsZeroWeakLimit(benchmark::State& st) {
    CurvatureField f;
    GreenKernel k;
    const auto cs = make_coefficients(5);
    auto s = tower(static_cast<int>(st.range(0)));
    slave_alpha(s, f, cs);
    for (auto _ : st) benchmark::DoNotOptimize(rhs_zero_weak_limit(s, f, k, cs));
}
BENCHMARK(BM_RhsZeroWeakLimit)->DenseRange(1, 6);

void BM_BubbleConstantQuad(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(bubble_constant_quad(ConstantKind::c2, 5));
}
BENCHMARK(BM_BubbleConstantQuad);

void BM_McConstant(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(mc_constant(ConstantKind::b1, 5, 200'000, 1));
}
BENCHMARK(BM_McConstant)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
