#include "shadowflow/curvature_field.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace shadowflow {

namespace {

struct Profile {
    double b0, b1, b2, b3;  // beta and its first three derivatives in s
};

Profile profile(double s) {
    if (s >= 1.0) return {0.0, 0.0, 0.0, 0.0};
    const double u = 1.0 - s;
    const double u2 = u * u;
    return {u2 * u2 * u, -5.0 * u2 * u2, 20.0 * u2 * u, -60.0 * u2};
}

std::string fmt_point(const Vec& x) {
    std::string out = "(";
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (k) out += ", ";
        out += fmt::format("{:.6g}", x[k]);
    }
    return out + ")";
}

}  // namespace

CurvatureField::CurvatureField(int n, double chart_radius, std::vector<Bump> bumps)
    : n_(n), radius_(chart_radius), bumps_(std::move(bumps)) {
    if (n < 3) throw UsageError(fmt::format("dimension n={} unsupported (need n >= 3)", n));
    if (!(chart_radius > 0.0)) throw UsageError("chart radius must be positive");
    for (const auto& b : bumps_) {
        if (b.center.size() != n) throw UsageError("bump center dimension does not match n");
        if (!(b.width > 0.0)) throw UsageError("bump width must be positive");
        if (!std::isfinite(b.amplitude)) throw UsageError("bump amplitude must be finite");
    }
}

bool CurvatureField::in_domain(const Vec& x) const {
    return x.size() == n_ && x.allFinite() && x.norm() <= radius_;
}

void CurvatureField::check(const Vec& x) const {
    if (x.size() != n_) throw UsageError(fmt::format("point has dimension {}, field has {}", x.size(), n_));
    if (!x.allFinite() || x.norm() > radius_)
        throw DomainError(fmt::format("point {} outside chart of radius {}", fmt_point(x), radius_));
}

double CurvatureField::offset(const Vec& x) const {
    check(x);
    const double r2 = x.squaredNorm();
    double v = -r2 * r2;
    for (const auto& b : bumps_) {
        const double s = (x - b.center).squaredNorm() / (b.width * b.width);
        v += b.amplitude * profile(s).b0;
    }
    return v;
}

double CurvatureField::value(const Vec& x) const { return 1.0 + offset(x); }

Jet CurvatureField::eval_jet(const Vec& x) const {
    check(x);
    const double r2 = x.squaredNorm();
    const double n = n_;
    Jet j;
    j.K = 1.0 - r2 * r2;
    j.grad = -4.0 * r2 * x;
    j.lap = -4.0 * (n + 2.0) * r2;
    j.grad_lap = -8.0 * (n + 2.0) * x;
    for (const auto& b : bumps_) {
        const Vec y = x - b.center;
        const double w2 = b.width * b.width;
        const double s = y.squaredNorm() / w2;
        if (s >= 1.0) continue;
        const Profile pr = profile(s);
        const double A = b.amplitude;
        j.K += A * pr.b0;
        j.grad += (A * pr.b1 * 2.0 / w2) * y;
        j.lap += A / w2 * (4.0 * s * pr.b2 + 2.0 * n * pr.b1);
        j.grad_lap += (A / w2 * ((4.0 + 2.0 * n) * pr.b2 + 4.0 * s * pr.b3) * 2.0 / w2) * y;
    }
    return j;
}

Mat CurvatureField::hessian(const Vec& x) const {
    check(x);
    const double r2 = x.squaredNorm();
    Mat h = -4.0 * (r2 * Mat::Identity(n_, n_) + 2.0 * x * x.transpose());
    for (const auto& b : bumps_) {
        const Vec y = x - b.center;
        const double w2 = b.width * b.width;
        const double s = y.squaredNorm() / w2;
        if (s >= 1.0) continue;
        const Profile pr = profile(s);
        h += b.amplitude * (pr.b1 * 2.0 / w2 * Mat::Identity(n_, n_) + pr.b2 * 4.0 / (w2 * w2) * y * y.transpose());
    }
    return h;
}

int ValidationReport::q() const {
    return static_cast<int>(std::count_if(critical_points.begin(), critical_points.end(),
                                          [](const CriticalPoint& c) { return !c.is_max_point; }));
}

namespace {

struct NewtonResult {
    Vec x;
    bool converged = false;
};

NewtonResult damped_newton(const CurvatureField& f, Vec x) {
    const double r_max = f.chart_radius();
    for (int it = 0; it < 300; ++it) {
        const Vec g = f.eval_jet(x).grad;
        const double gn = g.norm();
        if (gn < 1e-13) return {x, true};
        const Mat h = f.hessian(x);
        Vec dx = h.completeOrthogonalDecomposition().solve(-g);
        if (!dx.allFinite() || dx.norm() == 0.0) dx = -g;
        double step = 1.0;
        bool moved = false;
        for (int k = 0; k < 40; ++k) {
            Vec trial = x + step * dx;
            if (trial.norm() <= r_max) {
                const double tn = f.eval_jet(trial).grad.norm();
                if (tn < gn) {
                    x = trial;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!moved) return {x, gn < 1e-10};
    }
    return {x, f.eval_jet(x).grad.norm() < 1e-10};
}

}  // namespace

ValidationReport validate_condition(const CurvatureField& field) {
    ValidationReport rep;
    const int n = field.dim();
    const Vec origin = Vec::Zero(n);

    for (std::size_t j = 0; j < field.bumps().size(); ++j) {
        const auto& b = field.bumps()[j];
        if (b.center.norm() < b.width) {
            rep.violations.push_back(
                fmt::format("bump {} support contains x0; quartic form near x0 destroyed", j));
        }
    }

    std::vector<Vec> starts;
    starts.push_back(origin);
    for (const auto& b : field.bumps()) {
        starts.push_back(b.center);
        Vec dir = b.center.norm() > 0 ? Vec(b.center.normalized()) : Vec(Vec::Unit(n, 0));
        for (double f : {-0.75, -0.5, -0.25, 0.25, 0.5, 0.75}) starts.push_back(b.center + f * b.width * dir);
        for (int k = 0; k < n; ++k) {
            starts.push_back(b.center + 0.3 * b.width * Vec::Unit(n, k));
            starts.push_back(b.center - 0.3 * b.width * Vec::Unit(n, k));
        }
    }

    for (const auto& s0 : starts) {
        if (!field.in_domain(s0)) continue;
        const NewtonResult nr = damped_newton(field, s0);
        if (!nr.converged) {
            rep.diagnostics.push_back(fmt::format("root finder did not converge from {}", fmt_point(s0)));
            continue;
        }
        // The quartic maximum is degenerate; Newton approaches it only linearly.
        const bool at_max = nr.x.norm() < 1e-3 && field.eval_jet(origin).grad.norm() == 0.0;
        const Vec xc = at_max ? origin : nr.x;
        const bool dup = std::any_of(rep.critical_points.begin(), rep.critical_points.end(),
                                     [&](const CriticalPoint& c) { return (c.x - xc).norm() < 1e-7; });
        if (dup) continue;
        CriticalPoint cp;
        cp.x = xc;
        const Jet jt = field.eval_jet(xc);
        cp.K = jt.K;
        cp.lap = jt.lap;
        cp.is_max_point = at_max;
        if (!at_max) {
            Eigen::SelfAdjointEigenSolver<Mat> es(field.hessian(xc));
            cp.negative_directions = static_cast<int>((es.eigenvalues().array() < 0.0).count());
        }
        rep.critical_points.push_back(cp);
    }

    for (std::size_t k = 0; k < rep.critical_points.size(); ++k) {
        const auto& cp = rep.critical_points[k];
        if (cp.is_max_point) continue;
        if (!(cp.lap > 0.0)) {
            rep.violations.push_back(fmt::format("critical point {} has lap K = {:.6g} <= 0",
                                                 fmt_point(cp.x), cp.lap));
        }
    }

    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double rs = 0.99 * field.chart_radius();
    double kmin = field.value(origin);
    auto sample = [&](const Vec& x) { kmin = std::min(kmin, field.value(x)); };
    for (const auto& b : field.bumps())
        if (b.center.norm() <= rs) sample(b.center);
    for (int s = 0; s < 20000; ++s) {
        Vec d(n);
        for (int k = 0; k < n; ++k) d[k] = gauss(rng);
        sample(d.normalized() * rs * std::pow(unif(rng), 1.0 / n));
    }
    for (int k = 0; k < n; ++k) {
        sample(rs * Vec::Unit(n, k));
        sample(-rs * Vec::Unit(n, k));
    }
    rep.min_K_sampled = kmin;
    if (!(kmin > 0.0)) {
        rep.violations.push_back(fmt::format("K is not positive on the chart (sampled minimum {:.6g})", kmin));
    }

    rep.valid = rep.violations.empty();
    return rep;
}

}  // namespace shadowflow
