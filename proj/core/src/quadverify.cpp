#include "shadowflow/quadverify.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace shadowflow {

double flat_bubble(const Vec& x, const Vec& a, double lambda) {
    const double n = static_cast<double>(x.size());
    return std::pow(lambda / (1.0 + lambda * lambda * (x - a).squaredNorm()), 0.5 * (n - 2.0));
}

namespace {

struct BatchStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
};

BatchStats merge(const BatchStats& a, const BatchStats& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    BatchStats r;
    r.count = a.count + b.count;
    const double d = b.mean - a.mean;
    r.mean = a.mean + d * static_cast<double>(b.count) / static_cast<double>(r.count);
    r.m2 = a.m2 + b.m2 + d * d * static_cast<double>(a.count) * static_cast<double>(b.count) / static_cast<double>(r.count);
    return r;
}

using Sampler = std::function<double(std::mt19937_64&)>;

// Each batch has its own engine seeded from (seed, batch); batches are merged in index order.
McEstimate run_batches(const Sampler& draw, std::size_t samples, std::uint64_t seed) {
    if (samples < 2) throw UsageError("Monte-Carlo estimates need at least two samples");
    const std::size_t nb = (samples + kMcBatch - 1) / kMcBatch;
    std::vector<BatchStats> stats(nb);
    auto work = [&](std::size_t b) {
        std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        std::mt19937_64 rng(sq);
        const std::size_t cnt = std::min(kMcBatch, samples - b * kMcBatch);
        BatchStats s;
        for (std::size_t k = 0; k < cnt; ++k) {
            const double v = draw(rng);
            ++s.count;
            const double d = v - s.mean;
            s.mean += d / static_cast<double>(s.count);
            s.m2 += d * (v - s.mean);
        }
        stats[b] = s;
    };
    const std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), nb));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t b = t; b < nb; b += nt) work(b);
        });
    for (auto& th : pool) th.join();
    BatchStats tot;
    for (const auto& s : stats) tot = merge(tot, s);
    const double var = tot.m2 / static_cast<double>(tot.count - 1);
    return {tot.mean, std::sqrt(var / static_cast<double>(tot.count)), tot.count, seed};
}

// u ~ Beta(p, q) from two gamma draws.
double beta_draw(std::mt19937_64& rng, double p, double q) {
    std::gamma_distribution<double> gx(p, 1.0), gy(q, 1.0);
    const double x = gx(rng), y = gy(rng);
    return x / (x + y);
}

// Radius with density proportional to r^{n-1} (1+r^2)^{-m}.
double radius_draw(std::mt19937_64& rng, int n, double m) {
    const double u = beta_draw(rng, 0.5 * n, m - 0.5 * n);
    return std::sqrt(u / (1.0 - u));
}

Vec direction_draw(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(n);
    do {
        for (int k = 0; k < n; ++k) v[k] = nd(rng);
    } while (v.squaredNorm() == 0.0);
    return v / v.norm();
}

// Mass of (1+|x|^2)^{-m} over R^n.
double radial_normalizer(int n, double m) { return 0.5 * sphere_area(n) * std::beta(0.5 * n, m - 0.5 * n); }

}  // namespace

McEstimate mc_constant(ConstantKind kind, int n, std::size_t samples, std::uint64_t seed) {
    if (n < 3 || n > 5) throw UsageError(fmt::format("dimension n = {} outside 3..5", n));
    const double nn = n;
    const double m = 0.5 * (nn + 1.0);
    const double zq = radial_normalizer(n, m);
    std::function<double(double)> F;
    double pref = 1.0;
    switch (kind) {
        case ConstantKind::c1: F = [nn](double r2) { return std::pow(1.0 + r2, -nn); }; break;
        case ConstantKind::c2:
            pref = (nn - 2) * (nn - 2) / 4.0;
            F = [nn](double r2) { return (r2 - 1.0) * (r2 - 1.0) * std::pow(1.0 + r2, -(nn + 2)); };
            break;
        case ConstantKind::c3:
            pref = (nn - 2) * (nn - 2) / nn;
            F = [nn](double r2) { return r2 * std::pow(1.0 + r2, -(nn + 2)); };
            break;
        case ConstantKind::b1: F = [nn](double r2) { return std::pow(1.0 + r2, -0.5 * (nn + 2)); }; break;
    }
    const Sampler draw = [&](std::mt19937_64& rng) {
        const double r = radius_draw(rng, n, m);
        const double r2 = r * r;
        return pref * F(r2) * zq * std::pow(1.0 + r2, m);
    };
    return run_batches(draw, samples, seed);
}

McEstimate verify_constant(ConstantKind kind, int n, std::size_t samples, std::uint64_t seed) {
    const McEstimate e = mc_constant(kind, n, samples, seed);
    const double q = bubble_constant(kind, n);
    if (std::abs(e.value - q) > 5.0 * e.std_error)
        throw ConsistencyError(fmt::format("{} (n = {}): Monte-Carlo {:.8g} +- {:.3g} vs quadrature {:.10g}",
                                           to_string(kind), n, e.value, e.std_error, q));
    return e;
}

double flat_eps(const FlatBubble& i, const FlatBubble& j, int n) {
    const double base = i.lambda / j.lambda + j.lambda / i.lambda + i.lambda * j.lambda * (i.a - j.a).squaredNorm();
    return std::pow(base, 0.5 * (2.0 - n));
}

InteractionEstimate verify_interaction(const FlatBubble& bi, const FlatBubble& bj, int n, std::size_t samples,
                                       std::uint64_t seed, double max_rel_error) {
    if (n < 3 || n > 5) throw UsageError(fmt::format("dimension n = {} outside 3..5", n));
    if (bi.a.size() != n || bj.a.size() != n) throw UsageError("bubble centers must have n components");
    if (!(bi.lambda > 0.0 && bj.lambda > 0.0)) throw UsageError("bubble scales must be positive");
    const double nn = n;
    const double zq = radial_normalizer(n, nn);
    const double pw = (nn + 2.0) / (nn - 2.0);
    auto q = [&](const Vec& x, const FlatBubble& b) {
        return std::pow(b.lambda, nn) * std::pow(1.0 + b.lambda * b.lambda * (x - b.a).squaredNorm(), -nn) / zq;
    };
    const Sampler draw = [&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        const FlatBubble& c = coin(rng) < 0.5 ? bi : bj;
        const double r = radius_draw(rng, n, nn);
        const Vec x = c.a + direction_draw(rng, n) * (r / c.lambda);
        const double f = std::pow(flat_bubble(x, bi.a, bi.lambda), pw) * flat_bubble(x, bj.a, bj.lambda);
        return f / (0.5 * q(x, bi) + 0.5 * q(x, bj));
    };
    InteractionEstimate out;
    out.integral = run_batches(draw, samples, seed);
    if (out.integral.relative_error() > max_rel_error)
        throw PrecisionError(fmt::format("relative standard error {:.3g} exceeds {:.3g} after {} samples; "
                                         "increase the sample count",
                                         out.integral.relative_error(), max_rel_error, samples));
    out.eps = flat_eps(bi, bj, n);
    out.b1 = bubble_constant(ConstantKind::b1, n);
    out.ratio = out.integral.value / (out.b1 * out.eps);
    out.ratio_error = out.integral.std_error / (out.b1 * out.eps);
    return out;
}

void append_quadrature_checks(ScenarioReport& rep, std::uint64_t seed, std::size_t samples, bool interactions) {
    constexpr int n = 5;
    for (ConstantKind k : {ConstantKind::c1, ConstantKind::c2, ConstantKind::c3, ConstantKind::b1}) {
        const McEstimate e = mc_constant(k, n, samples, seed);
        const double q = bubble_constant(k, n);
        const double z = std::abs(e.value - q) / e.std_error;
        rep.add({"Q_" + to_string(k), "bubble constant: Monte-Carlo and quadrature agree", z <= 3.0, false, z, 3.0,
                 fmt::format("MC {:.8g} +- {:.3g}, quadrature {:.10g}", e.value, e.std_error, q)});
    }
    if (!interactions) return;
    // Equal scales 100 with eps = 0.01: lambda^2 d^2 = 0.01^{-2/3} - 2.
    const double lam = 100.0;
    const double d = std::sqrt(std::pow(0.01, -2.0 / 3.0) - 2.0) / lam;
    Vec ai = Vec::Zero(n), aj = Vec::Zero(n);
    aj[0] = d;
    const auto est = verify_interaction({ai, lam}, {aj, lam}, n, std::max<std::size_t>(samples, 10'000'000), seed);
    rep.add({"Q_interaction_eps_0.01", "leading interaction integral equals b1 eps_ij",
             est.ratio >= 0.9 && est.ratio <= 1.1, false, est.ratio, 1.1,
             fmt::format("ratio {:.5g} +- {:.2g} at eps {:.4g}, band [0.9, 1.1]", est.ratio, est.ratio_error, est.eps)});
}

}  // namespace shadowflow
