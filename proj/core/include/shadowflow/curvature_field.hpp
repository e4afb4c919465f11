#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace shadowflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A * beta(|x-c|^2 / w^2) with beta(s) = (1-s)^5 on s < 1.
struct Bump {
    Vec center;
    double amplitude = 0.0;
    double width = 0.1;
};

struct Jet {
    double K = 0.0;
    Vec grad;
    double lap = 0.0;
    Vec grad_lap;
};

class CurvatureField {
public:
    explicit CurvatureField(int n = 5, double chart_radius = 1.0, std::vector<Bump> bumps = {});

    int dim() const noexcept { return n_; }
    double chart_radius() const noexcept { return radius_; }
    const std::vector<Bump>& bumps() const noexcept { return bumps_; }
    Vec max_point() const { return Vec::Zero(n_); }

    bool in_domain(const Vec& x) const;

    Jet eval_jet(const Vec& x) const;
    double value(const Vec& x) const;
    // K(x) - 1, accumulated without the constant so small values keep full precision.
    double offset(const Vec& x) const;
    Mat hessian(const Vec& x) const;

private:
    void check(const Vec& x) const;

    int n_;
    double radius_;
    std::vector<Bump> bumps_;
};

struct CriticalPoint {
    Vec x;
    double K = 0.0;
    double lap = 0.0;
    int negative_directions = 0;
    bool is_max_point = false;
};

struct ValidationReport {
    bool valid = true;
    std::vector<CriticalPoint> critical_points;
    std::vector<std::string> violations;
    std::vector<std::string> diagnostics;
    double min_K_sampled = 0.0;

    // Critical points other than x0.
    int q() const;
};

ValidationReport validate_condition(const CurvatureField& field);

}  // namespace shadowflow
