#include "shadowflow/config.hpp"

#include "shadowflow/errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace shadowflow {

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"divergence", "compactified", "mixed", "off_max", "tower"};
    return names;
}

namespace {

Vec axis_point(int n, std::initializer_list<double> head) {
    Vec v = Vec::Zero(n);
    int k = 0;
    for (double x : head) v[k++] = x;
    return v;
}

}  // namespace

RunConfig default_config(const std::string& scenario) {
    if (std::find(scenario_names().begin(), scenario_names().end(), scenario) == scenario_names().end())
        throw UsageError(fmt::format("unknown scenario '{}'", scenario));
    RunConfig c;
    c.scenario.name = scenario;
    const int n = c.field.n;
    // Single-bubble runs share one configuration so the paired arms are comparable.
    c.kernel.h0 = 4.0;
    c.modification.eps_strength = 0.1;
    c.modification.eps_inner = 0.05;
    c.coefficients.gamma4 = 1.0;

    if (scenario == "compactified") {
        c.scenario.modified = true;
        c.integrator.pert.sign_log_lambda = 1.0;
        c.integrator.pert.sign_a = 1.0;
    } else if (scenario == "divergence") {
        c.integrator.pert.sign_log_lambda = -1.0;
        c.integrator.pert.sign_a = 1.0;
    } else if (scenario == "mixed") {
        c.scenario.bubbles = {{1e3, axis_point(n, {0.2}), 1.0}, {1e4, axis_point(n, {-0.2, 0.1}), 0.5}};
        c.scenario.omega_amplitude = 1.0;
        c.integrator.pert.sign_log_lambda = 1.0;
    } else if (scenario == "off_max") {
        c.field.bumps = {{axis_point(n, {0.4}), -0.04, 0.15}};
        c.scenario.lambda0 = 1e3;
        c.integrator.pert.sign_log_lambda = 1.0;
    } else if (scenario == "tower") {
        c.scenario.bubbles = {{1e3, axis_point(n, {0.05}), 1.0}, {1e4, axis_point(n, {-0.05}), 1.0}};
        c.scenario.theta_eps = 5e-4;
        c.integrator.pert.sign_log_lambda = 1.0;
    }
    return c;
}

namespace {

void check_keys(const YAML::Node& node, const std::string& section, std::set<std::string> allowed) {
    if (!node.IsMap()) throw UsageError(fmt::format("config section '{}' must be a mapping", section));
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw UsageError(fmt::format("unknown key '{}' in config section '{}'", key, section));
    }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& dst) {
    if (!node[key]) return;
    try {
        dst = node[key].as<T>();
    } catch (const YAML::Exception& e) {
        throw UsageError(fmt::format("config key '{}': {}", key, e.what()));
    }
}

Vec read_point(const YAML::Node& node, int n, const std::string& what) {
    if (!node.IsSequence()) throw UsageError(fmt::format("{} must be a list of coordinates", what));
    if (static_cast<int>(node.size()) > n)
        throw UsageError(fmt::format("{} has {} coordinates, dimension is {}", what, node.size(), n));
    Vec v = Vec::Zero(n);
    for (std::size_t k = 0; k < node.size(); ++k) v[static_cast<Eigen::Index>(k)] = node[k].as<double>();
    return v;
}

void apply(RunConfig& c, const YAML::Node& root) {
    if (!root || root.IsNull()) return;
    check_keys(root, "<root>", {"field", "kernel", "coefficients", "modification", "integrator", "scenario"});

    if (const auto f = root["field"]) {
        check_keys(f, "field", {"n", "chart_radius", "bumps"});
        read(f, "n", c.field.n);
        read(f, "chart_radius", c.field.chart_radius);
        if (f["bumps"]) {
            c.field.bumps.clear();
            for (const auto& b : f["bumps"]) {
                check_keys(b, "field.bumps[]", {"center", "amplitude", "width"});
                Bump bump;
                bump.center = read_point(b["center"], c.field.n, "bump center");
                read(b, "amplitude", bump.amplitude);
                read(b, "width", bump.width);
                c.field.bumps.push_back(bump);
            }
        }
    }
    const int n = c.field.n;
    // Points set by defaults follow a dimension change.
    auto resize = [n](Vec& v) {
        Vec w = Vec::Zero(n);
        for (Eigen::Index k = 0; k < std::min<Eigen::Index>(v.size(), n); ++k) w[k] = v[k];
        v = w;
    };
    for (auto& b : c.field.bumps) resize(b.center);
    for (auto& b : c.scenario.bubbles) resize(b.a);

    if (const auto k = root["kernel"]) {
        check_keys(k, "kernel", {"h0", "mass_table"});
        read(k, "h0", c.kernel.h0);
        if (k["mass_table"]) {
            c.kernel.mass_table.clear();
            for (const auto& m : k["mass_table"]) {
                check_keys(m, "kernel.mass_table[]", {"center", "weight", "scale"});
                MassBump mb;
                mb.center = read_point(m["center"], n, "mass table center");
                read(m, "weight", mb.weight);
                read(m, "scale", mb.scale);
                c.kernel.mass_table.push_back(mb);
            }
        }
    }

    if (const auto co = root["coefficients"]) {
        check_keys(co, "coefficients",
                   {"gamma1", "gamma2", "gamma3", "gamma4", "gamma_nabla_lap", "b_lambda", "b_a", "kappa"});
        auto opt = [&](const char* key, std::optional<double>& dst) {
            if (co[key]) dst = co[key].as<double>();
        };
        opt("gamma1", c.coefficients.gamma1);
        opt("gamma2", c.coefficients.gamma2);
        opt("gamma3", c.coefficients.gamma3);
        opt("gamma4", c.coefficients.gamma4);
        opt("gamma_nabla_lap", c.coefficients.gamma_nabla_lap);
        opt("b_lambda", c.coefficients.b_lambda);
        opt("b_a", c.coefficients.b_a);
        opt("kappa", c.coefficients.kappa);
    }

    if (const auto m = root["modification"]) {
        check_keys(m, "modification", {"eps_strength", "eps_inner", "delta_plateau", "profile"});
        read(m, "eps_strength", c.modification.eps_strength);
        read(m, "eps_inner", c.modification.eps_inner);
        read(m, "delta_plateau", c.modification.delta_plateau);
        if (m["profile"]) {
            const auto p = m["profile"].as<std::string>();
            if (p == "log_quintic") c.modification.profile = EtaProfile::log_quintic;
            else if (p == "quintic") c.modification.profile = EtaProfile::quintic;
            else throw UsageError(fmt::format("unknown cut-off profile '{}'", p));
        }
    }

    if (const auto in = root["integrator"]) {
        check_keys(in, "integrator", {"tol", "t_end", "wall_budget_s", "max_steps", "perturbation"});
        read(in, "tol", c.integrator.tol);
        read(in, "t_end", c.integrator.t_end);
        read(in, "wall_budget_s", c.integrator.wall_budget_s);
        read(in, "max_steps", c.integrator.max_steps);
        if (const auto p = in["perturbation"]) {
            check_keys(p, "integrator.perturbation",
                       {"family", "c", "rate", "policy", "seed", "channels", "sign_log_lambda", "sign_a",
                        "sign_log_alpha"});
            auto& pm = c.integrator.pert;
            if (p["family"]) pm.family = pert_family_from_string(p["family"].as<std::string>());
            read(p, "c", pm.c);
            read(p, "rate", pm.rate);
            read(p, "seed", pm.seed);
            read(p, "sign_log_lambda", pm.sign_log_lambda);
            read(p, "sign_a", pm.sign_a);
            read(p, "sign_log_alpha", pm.sign_log_alpha);
            if (p["policy"]) {
                const auto s = p["policy"].as<std::string>();
                if (s == "adversarial") pm.policy = SignPolicy::adversarial;
                else if (s == "random") pm.policy = SignPolicy::random;
                else throw UsageError(fmt::format("unknown sign policy '{}'", s));
            }
            if (p["channels"]) {
                pm.target_log_lambda = pm.target_a = pm.target_log_alpha = false;
                for (const auto& ch : p["channels"]) {
                    const auto s = ch.as<std::string>();
                    if (s == "log_lambda") pm.target_log_lambda = true;
                    else if (s == "a") pm.target_a = true;
                    else if (s == "log_alpha") pm.target_log_alpha = true;
                    else throw UsageError(fmt::format("unknown perturbation channel '{}'", s));
                }
            }
        }
    }

    if (const auto s = root["scenario"]) {
        check_keys(s, "scenario",
                   {"name", "eps0", "lambda0", "a0", "bubbles", "omega_amplitude", "alpha_mode", "modified",
                    "growth_target", "lambda_bound_factor", "lambda_min_factor", "C", "theta_eps", "seed"});
        if (s["name"] && s["name"].as<std::string>() != c.scenario.name)
            throw UsageError(fmt::format("config is for scenario '{}', requested '{}'", s["name"].as<std::string>(),
                                         c.scenario.name));
        read(s, "eps0", c.scenario.eps0);
        read(s, "lambda0", c.scenario.lambda0);
        read(s, "a0", c.scenario.a0);
        read(s, "omega_amplitude", c.scenario.omega_amplitude);
        read(s, "modified", c.scenario.modified);
        read(s, "growth_target", c.scenario.growth_target);
        read(s, "lambda_bound_factor", c.scenario.lambda_bound_factor);
        read(s, "lambda_min_factor", c.scenario.lambda_min_factor);
        read(s, "C", c.scenario.C);
        read(s, "theta_eps", c.scenario.theta_eps);
        read(s, "seed", c.scenario.seed);
        if (s["alpha_mode"]) {
            const auto m = s["alpha_mode"].as<std::string>();
            if (m == "slaved") c.scenario.alpha_mode = AlphaMode::slaved;
            else if (m == "dynamic") c.scenario.alpha_mode = AlphaMode::dynamic;
            else throw UsageError(fmt::format("unknown alpha mode '{}'", m));
        }
        if (s["bubbles"]) {
            c.scenario.bubbles.clear();
            for (const auto& b : s["bubbles"]) {
                check_keys(b, "scenario.bubbles[]", {"lambda", "a", "omega"});
                BubbleInit bi;
                read(b, "lambda", bi.lambda);
                bi.a = b["a"] ? read_point(b["a"], n, "bubble center") : Vec(Vec::Zero(n));
                read(b, "omega", bi.omega);
                c.scenario.bubbles.push_back(bi);
            }
        }
    }
}

nlohmann::json point_json(const Vec& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v[k]);
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text, const std::string& scenario) {
    RunConfig c = default_config(scenario);
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw UsageError(fmt::format("cannot parse config: {}", e.what()));
    }
    try {
        apply(c, root);
    } catch (const YAML::Exception& e) {
        throw UsageError(fmt::format("invalid config: {}", e.what()));
    }
    return c;
}

RunConfig load_config(const std::string& path, const std::string& scenario) {
    std::ifstream in(path);
    if (!in) throw UsageError(fmt::format("cannot open config file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), scenario);
}

nlohmann::json to_json(const RunConfig& c) {
    using nlohmann::json;
    json j;
    json bumps = json::array();
    for (const auto& b : c.field.bumps)
        bumps.push_back({{"center", point_json(b.center)}, {"amplitude", b.amplitude}, {"width", b.width}});
    j["field"] = {{"n", c.field.n}, {"chart_radius", c.field.chart_radius}, {"bumps", bumps}};
    json table = json::array();
    for (const auto& m : c.kernel.mass_table)
        table.push_back({{"center", point_json(m.center)}, {"weight", m.weight}, {"scale", m.scale}});
    j["kernel"] = {{"h0", c.kernel.h0}, {"mass_table", table}};
    json co = json::object();
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) co[k] = *v;
    };
    put("gamma1", c.coefficients.gamma1);
    put("gamma2", c.coefficients.gamma2);
    put("gamma3", c.coefficients.gamma3);
    put("gamma4", c.coefficients.gamma4);
    put("gamma_nabla_lap", c.coefficients.gamma_nabla_lap);
    put("b_lambda", c.coefficients.b_lambda);
    put("b_a", c.coefficients.b_a);
    put("kappa", c.coefficients.kappa);
    j["coefficients"] = co;
    j["modification"] = {{"eps_strength", c.modification.eps_strength},
                         {"eps_inner", c.modification.eps_inner},
                         {"delta_plateau", c.modification.delta_plateau},
                         {"profile", c.modification.profile == EtaProfile::log_quintic ? "log_quintic" : "quintic"}};
    const auto& p = c.integrator.pert;
    json channels = json::array();
    if (p.target_log_lambda) channels.push_back("log_lambda");
    if (p.target_a) channels.push_back("a");
    if (p.target_log_alpha) channels.push_back("log_alpha");
    j["integrator"] = {{"tol", c.integrator.tol},
                       {"t_end", c.integrator.t_end},
                       {"wall_budget_s", c.integrator.wall_budget_s},
                       {"max_steps", c.integrator.max_steps},
                       {"perturbation",
                        {{"family", to_string(p.family)},
                         {"c", p.c},
                         {"rate", p.rate},
                         {"policy", p.policy == SignPolicy::adversarial ? "adversarial" : "random"},
                         {"seed", p.seed},
                         {"channels", channels},
                         {"sign_log_lambda", p.sign_log_lambda},
                         {"sign_a", p.sign_a},
                         {"sign_log_alpha", p.sign_log_alpha}}}};
    json bubbles = json::array();
    for (const auto& b : c.scenario.bubbles)
        bubbles.push_back({{"lambda", b.lambda}, {"a", point_json(b.a)}, {"omega", b.omega}});
    const auto& s = c.scenario;
    j["scenario"] = {{"name", s.name},
                     {"eps0", s.eps0},
                     {"lambda0", s.lambda0},
                     {"a0", s.a0},
                     {"bubbles", bubbles},
                     {"omega_amplitude", s.omega_amplitude},
                     {"alpha_mode", s.alpha_mode == AlphaMode::slaved ? "slaved" : "dynamic"},
                     {"modified", s.modified},
                     {"growth_target", s.growth_target},
                     {"lambda_bound_factor", s.lambda_bound_factor},
                     {"lambda_min_factor", s.lambda_min_factor},
                     {"C", s.C},
                     {"theta_eps", s.theta_eps},
                     {"seed", s.seed}};
    return j;
}

void set_parameter(RunConfig& c, const std::string& key, double v) {
    auto& pm = c.integrator.pert;
    if (key == "kernel.h0") c.kernel.h0 = v;
    else if (key == "coefficients.gamma1") c.coefficients.gamma1 = v;
    else if (key == "coefficients.gamma2") c.coefficients.gamma2 = v;
    else if (key == "coefficients.gamma4") c.coefficients.gamma4 = v;
    else if (key == "coefficients.gamma_nabla_lap") c.coefficients.gamma_nabla_lap = v;
    else if (key == "coefficients.b_lambda") c.coefficients.b_lambda = v;
    else if (key == "coefficients.b_a") c.coefficients.b_a = v;
    else if (key == "coefficients.kappa") c.coefficients.kappa = v;
    else if (key == "modification.eps_strength") c.modification.eps_strength = v;
    else if (key == "modification.eps_inner") c.modification.eps_inner = v;
    else if (key == "integrator.tol") c.integrator.tol = v;
    else if (key == "integrator.t_end") c.integrator.t_end = v;
    else if (key == "integrator.perturbation.c") pm.c = v;
    else if (key == "integrator.perturbation.rate") pm.rate = v;
    else if (key == "scenario.eps0") c.scenario.eps0 = v;
    else if (key == "scenario.lambda0") c.scenario.lambda0 = v;
    else if (key == "scenario.a0") c.scenario.a0 = v;
    else if (key == "scenario.growth_target") c.scenario.growth_target = v;
    else if (key == "scenario.C") c.scenario.C = v;
    else if (key == "scenario.theta_eps") c.scenario.theta_eps = v;
    else throw UsageError(fmt::format("parameter '{}' cannot be swept", key));
}

}  // namespace shadowflow
