#include "shadowflow/batteries.hpp"
#include "shadowflow/coefficients.hpp"
#include "shadowflow/config.hpp"
#include "shadowflow/errors.hpp"
#include "shadowflow/quadverify.hpp"
#include "shadowflow/scenarios.hpp"
#include "shadowflow/trajectory_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace shadowflow;

namespace {

enum ExitCode { kOk = 0, kChecksFailed = 1, kUsage = 2, kRuntime = 3 };

void print_report(const ScenarioReport& r) {
    fmt::print("scenario {}: termination {}\n", r.scenario, r.termination);
    for (const auto& c : r.checks)
        fmt::print("  {:<4} {:<40} measured {:<14.6g} bound {:<12.6g} {}\n",
                   c.informational ? "info" : (c.passed ? "PASS" : "FAIL"), c.name, c.measured, c.bound, c.detail);
    for (const auto& n : r.notes) fmt::print("  note: {}\n", n);
}

void write_json(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw UsageError(fmt::format("cannot open '{}' for writing", path.string()));
    out << j.dump(2) << '\n';
}

RunConfig resolve_config(const std::string& scenario, const std::string& config_path) {
    return config_path.empty() ? default_config(scenario) : load_config(config_path, scenario);
}

void save_result(ScenarioResult& res, const fs::path& dir, const std::string& prefix) {
    fs::create_directories(dir);
    for (const auto& [name, tr] : res.trajectories) {
        const auto file = fmt::format("{}trajectory_{}.csv", prefix, name);
        write_csv(tr, (dir / file).string());
        res.report.trajectory_files.push_back(file);
    }
}

// "lo:hi:count" (inclusive, linear) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    auto num = [&](const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != s.size()) throw UsageError(fmt::format("bad number '{}' in grid '{}'", s, spec));
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        const auto a = spec.find(':'), b = spec.find(':', a + 1);
        if (b == std::string::npos) throw UsageError(fmt::format("grid '{}' must be lo:hi:count", spec));
        const double lo = num(spec.substr(0, a)), hi = num(spec.substr(a + 1, b - a - 1));
        const int cnt = static_cast<int>(num(spec.substr(b + 1)));
        if (cnt < 1) throw UsageError("grid count must be >= 1");
        for (int k = 0; k < cnt; ++k) out.push_back(cnt == 1 ? lo : lo + (hi - lo) * k / (cnt - 1));
    } else {
        std::size_t start = 0;
        while (start <= spec.size()) {
            const auto end = spec.find(',', start);
            out.push_back(num(spec.substr(start, end - start)));
            if (end == std::string::npos) break;
            start = end + 1;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced bubble-flow simulator and verifier"};
    app.require_subcommand(1);

    std::string scenario, config_path, out_dir;
    bool modified = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    auto* run = app.add_subcommand("run", "Run a canned scenario");
    run->add_option("scenario", scenario, "divergence | compactified | mixed | off_max | tower")->required();
    run->add_option("--config", config_path, "YAML configuration overlaying the scenario defaults");
    run->add_flag("--modified", modified, "Use the modified flow");
    run->add_option("--seed", seed, "Seed for stochastic perturbation signs")->each([&](const std::string&) {
        seed_given = true;
    });
    run->add_option("--out", out_dir, "Directory for trajectory CSV and summary.json");

    int trials = 10000;
    std::uint64_t vseed = 1;
    bool interactions = false;
    std::size_t samples = 1'000'000;
    auto* verify = app.add_subcommand("verify", "Randomized inequality batteries and Monte-Carlo checks");
    verify->add_option("--trials", trials, "Random configurations per battery");
    verify->add_option("--seed", vseed, "Seed");
    verify->add_flag("--interactions", interactions, "Also verify the interaction integral (1e7 samples)");
    verify->add_option("--samples", samples, "Monte-Carlo samples per constant");
    verify->add_option("--out", out_dir, "Directory for summary.json");

    int n_const = 5;
    auto* constants = app.add_subcommand("constants", "Print bubble constants and derived coefficients");
    constants->add_option("--n", n_const, "Dimension (3..5)");

    std::string param, grid, sweep_scenario = "divergence";
    auto* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
    sweep->add_option("--scenario", sweep_scenario, "Scenario to sweep");
    sweep->add_option("--param", param, "Parameter key, section.name")->required();
    sweep->add_option("--grid", grid, "lo:hi:count or comma list")->required();
    sweep->add_option("--config", config_path, "YAML configuration");
    sweep->add_option("--out", out_dir, "Directory for per-point outputs and sweep.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            RunConfig c = resolve_config(scenario, config_path);
            if (modified) c.scenario.modified = true;
            if (seed_given) {
                c.scenario.seed = seed;
                c.integrator.pert.seed = seed;
            }
            ScenarioResult res = run_scenario(c);
            if (!out_dir.empty()) {
                save_result(res, out_dir, "");
                write_json(res.report.to_json(), fs::path(out_dir) / "summary.json");
            }
            print_report(res.report);
            return res.report.all_passed() ? kOk : kChecksFailed;
        }
        if (*verify) {
            ScenarioReport rep = verify_batteries(vseed, trials);
            append_quadrature_checks(rep, vseed, samples, interactions);
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                write_json(rep.to_json(), fs::path(out_dir) / "summary.json");
            }
            print_report(rep);
            return rep.all_passed() ? kOk : kChecksFailed;
        }
        if (*constants) {
            for (ConstantKind k : {ConstantKind::c1, ConstantKind::c2, ConstantKind::c3, ConstantKind::b1}) {
                const auto q = bubble_constant_quad(k, n_const);
                fmt::print("{} = {:.15g}  (error estimate {:.2g})\n", to_string(k), q.value, q.error);
            }
            const auto cs = make_coefficients(n_const, {});
            fmt::print("Z = {:.15g}\nkappa = {:.15g}\n", cs.Z(), cs.kappa);
            fmt::print("gamma1 = {:.15g}\ngamma2 = {:.15g}\ngamma3 = {:.15g}\ngamma4 = {:.15g}\n", cs.gamma1,
                       cs.gamma2, cs.gamma3, cs.gamma4);
            fmt::print("b_lambda = {:.15g}\nb_a = {:.15g}\n", cs.b_lambda, cs.b_a);
            if (std::abs(cs.c2 - cs.c3) <= 1e-12 * cs.c2) fmt::print("note: c2 and c3 coincide in this dimension\n");
            return kOk;
        }
        if (*sweep) {
            const auto values = parse_grid(grid);
            const RunConfig base = resolve_config(sweep_scenario, config_path);
            std::vector<RunConfig> cfgs(values.size(), base);
            for (std::size_t k = 0; k < values.size(); ++k) set_parameter(cfgs[k], param, values[k]);
            std::vector<ScenarioResult> results(values.size());
            std::vector<std::string> errors(values.size());
            std::mutex mu;
            std::size_t next = 0;
            auto worker = [&] {
                for (;;) {
                    std::size_t k;
                    {
                        std::lock_guard<std::mutex> lk(mu);
                        if (next >= values.size()) return;
                        k = next++;
                    }
                    try {
                        results[k] = run_scenario(cfgs[k]);
                    } catch (const std::exception& e) {
                        errors[k] = e.what();
                    }
                }
            };
            const std::size_t nt = std::max<std::size_t>(
                1, std::min<std::size_t>(std::thread::hardware_concurrency(), values.size()));
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();

            nlohmann::json summary = {{"param", param}, {"points", nlohmann::json::array()}};
            bool all_ok = true;
            for (std::size_t k = 0; k < values.size(); ++k) {
                fmt::print("{} = {:.6g}\n", param, values[k]);
                nlohmann::json point = {{"value", values[k]}};
                if (!errors[k].empty()) {
                    fmt::print("  error: {}\n", errors[k]);
                    point["error"] = errors[k];
                    all_ok = false;
                } else {
                    if (!out_dir.empty()) save_result(results[k], out_dir, fmt::format("point{}_", k));
                    print_report(results[k].report);
                    point["report"] = results[k].report.to_json();
                    all_ok = all_ok && results[k].report.all_passed();
                }
                summary["points"].push_back(point);
            }
            if (!out_dir.empty()) write_json(summary, fs::path(out_dir) / "sweep.json");
            return all_ok ? kOk : kChecksFailed;
        }
    } catch (const UsageError& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        return kUsage;
    } catch (const StiffnessError& e) {
        fmt::print(stderr, "stiffness error: {}\nstate: {}\n", e.what(), e.state_dump());
        return kRuntime;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kRuntime;
    }
    return kOk;
}
