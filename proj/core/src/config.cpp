#include "porflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace porflow {

namespace pt = boost::property_tree;

RunMode parse_run_mode(std::string_view name)
{
    if (name == "simulate")
        return RunMode::simulate;
    if (name == "verify")
        return RunMode::verify;
    if (name == "convergence")
        return RunMode::convergence;
    if (name == "constitutive-table")
        return RunMode::constitutive_table;
    throw ValidationError("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(RunMode mode)
{
    switch (mode) {
    case RunMode::simulate: return "simulate";
    case RunMode::verify: return "verify";
    case RunMode::convergence: return "convergence";
    case RunMode::constitutive_table: return "constitutive-table";
    }
    return "simulate";
}

InitialProfile parse_initial_profile(std::string_view name)
{
    if (name == "uniform")
        return InitialProfile::uniform;
    if (name == "cosine")
        return InitialProfile::cosine;
    if (name == "step")
        return InitialProfile::step;
    if (name == "potential")
        return InitialProfile::potential;
    throw ValidationError("unknown initial profile '" + std::string(name) + "'");
}

std::string_view to_string(InitialProfile profile)
{
    switch (profile) {
    case InitialProfile::uniform: return "uniform";
    case InitialProfile::cosine: return "cosine";
    case InitialProfile::step: return "step";
    case InitialProfile::potential: return "potential";
    }
    return "uniform";
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues)
{
    std::string out;
    for (const auto& i : issues) {
        if (!out.empty())
            out += '\n';
        out += i.key + ": " + i.reason;
    }
    return out;
}

std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(const std::string& s)
{
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v))
        throw ValidationError("expected a finite number, got '" + s + "'");
    return v;
}

int parse_int(const std::string& s)
{
    int v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        throw ValidationError("expected an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s)
{
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    throw ValidationError("expected a boolean, got '" + s + "'");
}

BoundaryTag parse_tag(const std::string& s)
{
    if (s == "gamma1" || s == "dirichlet")
        return BoundaryTag::gamma1;
    if (s == "gamma2" || s == "neumann")
        return BoundaryTag::gamma2;
    throw ValidationError("expected gamma1 or gamma2, got '" + s + "'");
}

struct Field
{
    const char* key;  ///< section.name
    std::function<std::optional<std::string>(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <class T>
Field real(const char* key, T RunConfig::*member)
{
    return {key, [member](const RunConfig& c) { return std::optional(format_double(c.*member)); },
            [member](RunConfig& c, const std::string& v) { c.*member = parse_double(v); }};
}

Field real(const char* key, std::function<double&(RunConfig&)> ref)
{
    return {key,
            [ref](const RunConfig& c) {
                return std::optional(format_double(ref(const_cast<RunConfig&>(c))));
            },
            [ref](RunConfig& c, const std::string& v) { ref(c) = parse_double(v); }};
}

Field integer(const char* key, std::function<int&(RunConfig&)> ref)
{
    return {key,
            [ref](const RunConfig& c) {
                return std::optional(std::to_string(ref(const_cast<RunConfig&>(c))));
            },
            [ref](RunConfig& c, const std::string& v) { ref(c) = parse_int(v); }};
}

Field side_tag(const char* key, Side side)
{
    return {key,
            [side](const RunConfig& c) -> std::optional<std::string> {
                auto it = c.mesh.tags.find(side);
                if (it == c.mesh.tags.end())
                    return std::nullopt;
                return std::string(to_string(it->second));
            },
            [side](RunConfig& c, const std::string& v) { c.mesh.tags[side] = parse_tag(v); }};
}

Field optional_real(const char* key, std::function<std::optional<double>&(RunConfig&)> ref)
{
    return {key,
            [ref](const RunConfig& c) -> std::optional<std::string> {
                const auto& o = ref(const_cast<RunConfig&>(c));
                if (!o)
                    return std::nullopt;
                return format_double(*o);
            },
            [ref](RunConfig& c, const std::string& v) { ref(c) = parse_double(v); }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        {"run.mode", [](const RunConfig& c) { return std::optional(std::string(to_string(c.mode))); },
         [](RunConfig& c, const std::string& v) { c.mode = parse_run_mode(v); }},
        {"run.preset",
         [](const RunConfig& c) -> std::optional<std::string> {
             if (c.preset.empty())
                 return std::nullopt;
             return c.preset;
         },
         [](RunConfig& c, const std::string& v) { c.preset = v; }},
        real("run.tau", &RunConfig::tau),
        real("run.final_time", &RunConfig::final_time),

        integer("mesh.dim", [](RunConfig& c) -> int& { return c.mesh.dim; }),
        real("mesh.length_x", [](RunConfig& c) -> double& { return c.mesh.extents[0]; }),
        real("mesh.length_y", [](RunConfig& c) -> double& { return c.mesh.extents[1]; }),
        integer("mesh.cells_x", [](RunConfig& c) -> int& { return c.mesh.cells[0]; }),
        integer("mesh.cells_y", [](RunConfig& c) -> int& { return c.mesh.cells[1]; }),
        side_tag("mesh.left", Side::left),
        side_tag("mesh.right", Side::right),
        side_tag("mesh.bottom", Side::bottom),
        side_tag("mesh.top", Side::top),

        real("material.gamma_w", [](RunConfig& c) -> double& { return c.material.gamma_w; }),
        real("material.gamma_n", [](RunConfig& c) -> double& { return c.material.gamma_n; }),
        real("material.gamma_wn", [](RunConfig& c) -> double& { return c.material.gamma_wn; }),
        real("material.eta_w", [](RunConfig& c) -> double& { return c.material.eta_w; }),
        real("material.eta_n", [](RunConfig& c) -> double& { return c.material.eta_n; }),
        real("material.s_eps", [](RunConfig& c) -> double& { return c.material.s_eps; }),
        real("material.phi_m", [](RunConfig& c) -> double& { return c.material.phi_m; }),
        real("material.c_min", [](RunConfig& c) -> double& { return c.material.c_min; }),
        {"material.rel_perm",
         [](const RunConfig& c) { return std::optional(std::string(to_string(c.rel_perm))); },
         [](RunConfig& c, const std::string& v) { c.rel_perm = parse_rel_perm_kind(v); }},
        real("material.porosity", &RunConfig::porosity),
        real("material.permeability", &RunConfig::permeability),

        {"initial.profile",
         [](const RunConfig& c) { return std::optional(std::string(to_string(c.initial.profile))); },
         [](RunConfig& c, const std::string& v) { c.initial.profile = parse_initial_profile(v); }},
        real("initial.saturation", [](RunConfig& c) -> double& { return c.initial.saturation; }),
        real("initial.amplitude", [](RunConfig& c) -> double& { return c.initial.amplitude; }),
        real("initial.left", [](RunConfig& c) -> double& { return c.initial.left; }),
        real("initial.right", [](RunConfig& c) -> double& { return c.initial.right; }),
        real("initial.mu", [](RunConfig& c) -> double& { return c.initial.mu; }),

        real("sources.q_w", [](RunConfig& c) -> double& { return c.boundary.q_w; }),
        real("sources.q_n", [](RunConfig& c) -> double& { return c.boundary.q_n; }),

        real("boundary.saturation",
             [](RunConfig& c) -> double& { return c.boundary.dirichlet_saturation; }),
        real("boundary.pressure", [](RunConfig& c) -> double& { return c.boundary.dirichlet_pressure; }),
        real("boundary.flux_n", [](RunConfig& c) -> double& { return c.boundary.flux_n; }),
        real("boundary.flux_w", [](RunConfig& c) -> double& { return c.boundary.flux_w; }),

        real("solver.abs_tol", [](RunConfig& c) -> double& { return c.newton.abs_tol; }),
        real("solver.rel_tol", [](RunConfig& c) -> double& { return c.newton.rel_tol; }),
        integer("solver.max_iters", [](RunConfig& c) -> int& { return c.newton.max_iters; }),
        real("solver.backtrack", [](RunConfig& c) -> double& { return c.newton.backtrack; }),
        real("solver.min_step", [](RunConfig& c) -> double& { return c.newton.min_step; }),
        integer("solver.fallback_depth", [](RunConfig& c) -> int& { return c.newton.fallback_depth; }),
        {"solver.linear",
         [](const RunConfig& c) { return std::optional(std::string(to_string(c.newton.linear.kind))); },
         [](RunConfig& c, const std::string& v) { c.newton.linear.kind = parse_linear_solver_kind(v); }},
        real("solver.linear_tol", [](RunConfig& c) -> double& { return c.newton.linear.tolerance; }),
        integer("solver.linear_max_iters",
                [](RunConfig& c) -> int& { return c.newton.linear.max_iterations; }),
        integer("solver.direct_limit", [](RunConfig& c) -> int& { return c.newton.linear.direct_limit; }),

        {"output.dir", [](const RunConfig& c) { return std::optional(c.output.dir); },
         [](RunConfig& c, const std::string& v) { c.output.dir = v; }},
        integer("output.stride", [](RunConfig& c) -> int& { return c.output.stride; }),
        {"output.vtk",
         [](const RunConfig& c) { return std::optional(std::string(c.output.vtk ? "true" : "false")); },
         [](RunConfig& c, const std::string& v) { c.output.vtk = parse_bool(v); }},

        integer("table.points", [](RunConfig& c) -> int& { return c.table.points; }),
        optional_real("table.s_min", [](RunConfig& c) -> std::optional<double>& { return c.table.s_min; }),
        optional_real("table.s_max", [](RunConfig& c) -> std::optional<double>& { return c.table.s_max; }),

        real("mms.s_mean", [](RunConfig& c) -> double& { return c.mms.s_mean; }),
        real("mms.s_amp", [](RunConfig& c) -> double& { return c.mms.s_amp; }),
        real("mms.p_amp", [](RunConfig& c) -> double& { return c.mms.p_amp; }),
        real("mms.decay", [](RunConfig& c) -> double& { return c.mms.decay; }),
    };
    return table;
}

const Field* find_field(const std::string& key)
{
    for (const auto& f : fields())
        if (key == f.key)
            return &f;
    return nullptr;
}

void normalize_tags(MeshSpec& mesh)
{
    if (mesh.dim == 1) {
        mesh.tags.erase(Side::bottom);
        mesh.tags.erase(Side::top);
        mesh.cells[1] = 1;
    }
    for (Side s : {Side::left, Side::right})
        mesh.tags.try_emplace(s, BoundaryTag::gamma2);
    if (mesh.dim == 2)
        for (Side s : {Side::bottom, Side::top})
            mesh.tags.try_emplace(s, BoundaryTag::gamma2);
}

std::pair<double, double> initial_range(const InitialSpec& init, const ConstitutiveModel& model)
{
    switch (init.profile) {
    case InitialProfile::uniform: return {init.saturation, init.saturation};
    case InitialProfile::cosine:
        return {init.saturation - std::abs(init.amplitude), init.saturation + std::abs(init.amplitude)};
    case InitialProfile::step: return {std::min(init.left, init.right), std::max(init.left, init.right)};
    case InitialProfile::potential: {
        const double s = model.invert_mu(init.mu);
        return {s, s};
    }
    }
    return {0.0, 0.0};
}

} // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : ValidationError(join_issues(issues)), issues_(std::move(issues))
{}

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names = {"closed_1d", "closed_2d", "driven_dirichlet_1d",
                                                   "mms_1d"};
    return names;
}

RunConfig preset_config(std::string_view name)
{
    RunConfig c;
    c.preset = std::string(name);
    if (name == "closed_1d") {
        c.mesh = MeshSpec::closed(1, {1.0, 1.0}, {64, 1});
        c.initial.profile = InitialProfile::cosine;
        c.initial.saturation = 0.5;
        c.initial.amplitude = 0.3;
    } else if (name == "closed_2d") {
        c.mesh = MeshSpec::closed(2, {1.0, 1.0}, {16, 16});
        c.initial.profile = InitialProfile::cosine;
        c.initial.saturation = 0.5;
        c.initial.amplitude = 0.3;
    } else if (name == "driven_dirichlet_1d") {
        c.mesh = MeshSpec::closed(1, {1.0, 1.0}, {32, 1});
        c.mesh.tags[Side::left] = BoundaryTag::gamma1;
        c.initial.profile = InitialProfile::uniform;
        c.initial.saturation = 0.3;
        c.boundary.dirichlet_saturation = 0.7;
        c.boundary.dirichlet_pressure = 0.0;
    } else if (name == "mms_1d") {
        c.mode = RunMode::convergence;
    } else {
        throw ConfigError(std::vector<ConfigIssue>{{"run.preset", "unknown preset '" + std::string(name) + "'"}});
    }
    return c;
}

RunConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides,
                            std::string_view source)
{
    pt::ptree tree;
    std::istringstream is{std::string(text)};
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::vector<ConfigIssue>{{std::string(source) + ":" + std::to_string(e.line()), e.message()}});
    }

    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<ConfigIssue> issues;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            issues.push_back({section, "key outside of any section"});
            continue;
        }
        for (const auto& [key, value] : body)
            entries.emplace_back(section + "." + key, value.data());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) {
            issues.push_back({o, "override must have the form section.key=value"});
            continue;
        }
        entries.emplace_back(o.substr(0, eq), o.substr(eq + 1));
    }

    std::string preset;
    for (const auto& [k, v] : entries)
        if (k == "run.preset")
            preset = v;

    RunConfig cfg;
    if (!preset.empty()) {
        try {
            cfg = preset_config(preset);
        } catch (const ConfigError& e) {
            issues.insert(issues.end(), e.issues().begin(), e.issues().end());
        }
    }

    for (const auto& [k, v] : entries) {
        const Field* f = find_field(k);
        if (!f) {
            issues.push_back({k, "unknown key"});
            continue;
        }
        try {
            f->set(cfg, v);
        } catch (const std::exception& e) {
            issues.push_back({k, e.what()});
        }
    }
    if (!issues.empty())
        throw ConfigError(std::move(issues));

    normalize_tags(cfg.mesh);
    auto problems = validate(cfg);
    if (!problems.empty())
        throw ConfigError(std::move(problems));
    return cfg;
}

RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(std::vector<ConfigIssue>{{path, "cannot open config file"}});
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), overrides, path);
}

std::vector<ConfigIssue> validate(const RunConfig& cfg)
{
    std::vector<ConfigIssue> issues;
    auto issue = [&](std::string key, std::string reason) {
        issues.push_back({std::move(key), std::move(reason)});
    };

    if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau))
        issue("run.tau", "time step must be positive");
    if (!(cfg.final_time > 0.0) || !std::isfinite(cfg.final_time))
        issue("run.final_time", "final time must be positive");

    try {
        build_mesh(cfg.mesh);
    } catch (const std::exception& e) {
        issue("mesh", e.what());
    }

    bool admissible = false;
    try {
        check_admissibility(cfg.material);
        admissible = true;
    } catch (const AdmissibilityError& e) {
        issue("material.gamma_wn", e.what());
    } catch (const std::exception& e) {
        issue("material", e.what());
    }

    if (!(cfg.porosity >= cfg.material.phi_m && cfg.porosity <= 1.0))
        issue("material.porosity",
              "Assumption 1 (porosity bounds): porosity must lie in [phi_m, 1]");
    if (!(cfg.permeability > 0.0))
        issue("material.permeability",
              "Assumption 1 (uniform ellipticity): permeability must be positive");

    try {
        cfg.newton.validate();
    } catch (const std::exception& e) {
        issue("solver", e.what());
    }

    if (cfg.output.stride < 0)
        issue("output.stride", "must be non-negative");
    if (cfg.output.dir.empty())
        issue("output.dir", "must not be empty");

    if (cfg.table.points < 2)
        issue("table.points", "need at least two points");

    if (!admissible)
        return issues;

    const ConstitutiveModel model(cfg.material, cfg.rel_perm);
    const double lo = cfg.material.s_eps;
    const double hi = 1.0 - lo;
    const double slack = 1e-12;

    const double tmin = cfg.table.s_min.value_or(lo);
    const double tmax = cfg.table.s_max.value_or(hi);
    if (!(tmin > 0.0 && tmax < 1.0 && tmin < tmax))
        issue("table.s_min", "table range must satisfy 0 < s_min < s_max < 1");

    if (cfg.mode == RunMode::convergence) {
        if (cfg.mesh.dim != 1)
            issue("mesh.dim", "convergence studies are one-dimensional");
        if (cfg.mms.s_mean - std::abs(cfg.mms.s_amp) < lo || cfg.mms.s_mean + std::abs(cfg.mms.s_amp) > hi)
            issue("mms.s_amp", "manufactured saturation leaves [s_eps, 1 - s_eps]");
        if (!(cfg.mms.decay >= 0.0))
            issue("mms.decay", "must be non-negative");
    }

    try {
        const auto [smin, smax] = initial_range(cfg.initial, model);
        if (smin < lo - slack || smax > hi + slack || !(smin > 0.0) || !(smax < 1.0))
            issue("initial",
                  "Assumption 4 (initial bounds): initial saturation must lie in [s_eps, 1 - s_eps]");
    } catch (const std::exception& e) {
        issue("initial.mu", e.what());
    }

    bool dirichlet = false;
    for (const auto& [side, tag] : cfg.mesh.tags)
        dirichlet = dirichlet || tag == BoundaryTag::gamma1;
    if (dirichlet) {
        const double s = cfg.boundary.dirichlet_saturation;
        if (s < lo || s > hi)
            issue("boundary.saturation",
                  "Assumption 4 (boundary range): mu_w(s_eps) <= phi_1 <= mu_w(1 - s_eps) requires the "
                  "boundary saturation in [s_eps, 1 - s_eps]");
    }
    return issues;
}

std::string serialize(const RunConfig& cfg)
{
    pt::ptree tree;
    for (const auto& f : fields()) {
        const auto value = f.get(cfg);
        if (value)
            tree.put(pt::ptree::path_type(f.key, '.'), *value);
    }
    std::ostringstream os;
    pt::write_ini(os, tree);
    return os.str();
}

ProblemData build_problem(const RunConfig& cfg)
{
    const ConstitutiveModel model(cfg.material, cfg.rel_perm);
    ProblemData data(build_mesh(cfg.mesh), model);
    std::fill(data.porosity.begin(), data.porosity.end(), cfg.porosity);
    for (auto& k : data.permeability)
        k = Permeability{cfg.permeability, 0.0, cfg.permeability};

    const BoundarySpec& b = cfg.boundary;
    if (b.q_w != 0.0)
        data.q_w = SaturationFunction::constant(b.q_w);
    if (b.q_n != 0.0)
        data.q_n = SaturationFunction::constant(b.q_n);
    if (b.flux_n != 0.0)
        data.flux_n = SaturationFunction::constant(b.flux_n);
    if (b.flux_w != 0.0)
        data.flux_w = SaturationFunction::constant(b.flux_w);
    if (data.mesh.has_dirichlet()) {
        const double mu = model.chemical_potential(b.dirichlet_saturation);
        const double p = b.dirichlet_pressure;
        data.mu_dirichlet = [mu](const Point&, double) { return mu; };
        data.p_dirichlet = [p](const Point&, double) { return p; };
    }

    const InitialSpec init = cfg.initial;
    const auto extents = cfg.mesh.extents;
    const int dim = cfg.mesh.dim;
    switch (init.profile) {
    case InitialProfile::uniform: {
        const double mu = model.chemical_potential(init.saturation);
        data.initial_mu = [mu](const Point&, double) { return mu; };
        break;
    }
    case InitialProfile::cosine:
        data.initial_mu = [init, extents, dim, model](const Point& x, double) {
            double shape = std::cos(std::numbers::pi * x.x / extents[0]);
            if (dim == 2)
                shape *= std::cos(std::numbers::pi * x.y / extents[1]);
            return model.chemical_potential(init.saturation + init.amplitude * shape);
        };
        break;
    case InitialProfile::step: {
        const double ml = model.chemical_potential(init.left);
        const double mr = model.chemical_potential(init.right);
        const double mid = 0.5 * extents[0];
        data.initial_mu = [ml, mr, mid](const Point& x, double) { return x.x < mid ? ml : mr; };
        break;
    }
    case InitialProfile::potential: {
        const double mu = init.mu;
        data.initial_mu = [mu](const Point&, double) { return mu; };
        break;
    }
    }
    data.validate();
    return data;
}

ManufacturedSolution build_manufactured(const RunConfig& cfg)
{
    return cosine_manufactured(cfg.mms.s_mean, cfg.mms.s_amp, cfg.mms.p_amp, cfg.mms.decay,
                               cfg.mesh.extents[0]);
}

} // namespace porflow
