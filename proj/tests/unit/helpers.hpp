#pragma once

#include "shadowflow/interaction_kernel.hpp"

#include <cmath>
#include <initializer_list>
#include <random>

namespace testing_helpers {

using shadowflow::Vec;

inline Vec point(int n, std::initializer_list<double> head) {
    Vec v = Vec::Zero(n);
    int k = 0;
    for (double x : head) v[k++] = x;
    return v;
}

inline Vec random_in_ball(std::mt19937_64& rng, int n, double r_lo, double r_hi) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> u(r_lo, r_hi);
    Vec v(n);
    for (int k = 0; k < n; ++k) v[k] = nd(rng);
    return v / v.norm() * u(rng);
}

inline Vec random_unit(std::mt19937_64& rng, int n) { return random_in_ball(rng, n, 1.0, 1.0); }

inline shadowflow::BubbleState random_state(std::mt19937_64& rng, int p, int n = 5, double log_lo = std::log(10.0),
                                            double log_hi = std::log(1e4), double r_hi = 0.8) {
    std::uniform_real_distribution<double> ul(log_lo, log_hi), ua(0.7, 1.4);
    shadowflow::BubbleState s;
    for (int i = 0; i < p; ++i) s.bubbles.push_back({ua(rng), ul(rng), random_in_ball(rng, n, 0.0, r_hi)});
    return s;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_helpers
