#include "shadowflow/trajectory_io.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>

#include <fstream>

namespace shadowflow {

std::string csv_header(const Trajectory& traj) {
    if (traj.samples.empty()) throw UsageError("cannot write an empty trajectory");
    const auto& s0 = traj.samples.front().state;
    const int p = s0.p();
    const int n = s0.dim();
    std::string h = "t";
    for (int i = 0; i < p; ++i) {
        h += fmt::format(",ln_lambda_{}", i);
        for (int k = 0; k < n; ++k) h += fmt::format(",a_{}_{}", i, k);
        h += fmt::format(",alpha_{}", i);
    }
    for (int i = 0; i < p; ++i) h += fmt::format(",lam_a2_{},lam_a5_{},mass_inv_{}", i, i, i);
    h += ",theta,psi,energy";
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) h += fmt::format(",eps_{}_{}", i, j);
    return h;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
    out << csv_header(traj) << '\n';
    fmt::memory_buffer buf;
    for (const auto& smp : traj.samples) {
        buf.clear();
        fmt::format_to(std::back_inserter(buf), "{:.17g}", smp.t);
        for (const auto& b : smp.state.bubbles) {
            fmt::format_to(std::back_inserter(buf), ",{:.17g}", b.log_lambda);
            for (Eigen::Index k = 0; k < b.a.size(); ++k) fmt::format_to(std::back_inserter(buf), ",{:.17g}", b.a[k]);
            fmt::format_to(std::back_inserter(buf), ",{:.17g}", b.alpha);
        }
        const auto& d = smp.diag;
        for (int i = 0; i < smp.state.p(); ++i) {
            auto at = [i](const std::vector<double>& v) {
                return i < static_cast<int>(v.size()) ? v[i] : std::numeric_limits<double>::quiet_NaN();
            };
            fmt::format_to(std::back_inserter(buf), ",{:.17g},{:.17g},{:.17g}", at(d.lam_a2), at(d.lam_a5),
                           at(d.mass_inv));
        }
        fmt::format_to(std::back_inserter(buf), ",{:.17g},{:.17g},{:.17g}", d.theta, d.psi, d.energy);
        for (double e : d.eps_pairs) fmt::format_to(std::back_inserter(buf), ",{:.17g}", e);
        buf.push_back('\n');
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

void write_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError(fmt::format("cannot open '{}' for writing", path));
    write_csv(traj, out);
    if (!out) throw Error(fmt::format("write to '{}' failed", path));
}

}  // namespace shadowflow
