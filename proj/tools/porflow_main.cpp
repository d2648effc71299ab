#include <cstdlib>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "porflow/config.hpp"
#include "porflow/mms.hpp"
#include "porflow/output.hpp"
#include "porflow/simulation.hpp"

namespace fs = std::filesystem;
using namespace porflow;

namespace {

enum ExitCode { ok = 0, validation = 1, solver = 2, invariant = 3 };

constexpr double spatial_order_min = 1.8;
constexpr double temporal_order_min = 0.8;
constexpr double mass_rel_tol = 1e-10;

struct Options
{
    std::string config;
    std::string preset;
    std::string out;
    bool deterministic = false;
    std::vector<std::string> overrides;
};

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

int fail(int code, const char* kind, const std::string& message)
{
    std::cerr << "porflow-error: code=" << code << " kind=" << kind << " message=\"" << escape(message)
              << "\"\n";
    return code;
}

int thread_count()
{
    if (const char* env = std::getenv("PORFLOW_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return 1;
}

RunConfig load(const Options& o, RunMode mode)
{
    std::vector<std::string> overrides = o.overrides;
    if (!o.out.empty())
        overrides.push_back("output.dir=" + o.out);
    overrides.push_back("run.mode=" + std::string(to_string(mode)));
    if (!o.config.empty()) {
        if (!o.preset.empty())
            overrides.insert(overrides.begin(), "run.preset=" + o.preset);
        return parse_config(o.config, overrides);
    }
    if (o.preset.empty())
        throw ConfigError(std::vector<ConfigIssue>{{"--config", "a config file or --preset is required"}});
    return parse_config_text("[run]\npreset = " + o.preset + "\n", overrides, "--preset");
}

void dump_fields(const RunConfig& cfg, const ProblemData& data, const State& state, int step)
{
    const fs::path dir = cfg.output.dir;
    auto csv = open_output(dir / ("fields_" + std::to_string(step) + ".csv"));
    write_fields_csv(csv, state, data);
    if (cfg.output.vtk && data.mesh.dim() == 2) {
        auto vtk = open_output(dir / ("fields_" + std::to_string(step) + ".vtk"));
        write_fields_vtk(vtk, state, data);
    }
}

int simulate(const RunConfig& cfg, bool verify)
{
    const ProblemData data = build_problem(cfg);

    const std::vector<double> times{0.0, cfg.final_time};
    const Assumption4Report a4 = check_assumption4(data, times);
    if (!a4.pass) {
        if (verify)
            return fail(validation, "validation", a4.violations.front());
        for (const auto& v : a4.violations)
            std::cerr << "warning: " << v << '\n';
    }

    const fs::path dir = cfg.output.dir;
    {
        auto archived = open_output(dir / "config.ini");
        archived << serialize(cfg);
    }
    auto ledger_file = open_output(dir / "ledger.csv");
    LedgerWriter ledger(ledger_file);

    const State initial = initialize(data, cfg.newton.linear);
    const double mass0 = mass(initial, data);
    if (cfg.output.stride > 0)
        dump_fields(cfg, data, initial, 0);

    const bool closed = data.is_closed();
    int step = 0;
    RunOptions opts;
    opts.newton = cfg.newton;
    opts.keep_states = false;
    opts.on_step = [&](const State& state, const StepReport& rep) {
        ++step;
        ledger.write(step, rep);
        if (cfg.output.stride > 0 && step % cfg.output.stride == 0)
            dump_fields(cfg, data, state, step);
        if (!closed)
            return;
        std::ostringstream what;
        what << std::setprecision(17);
        if (rep.energy_inequality_ok && !*rep.energy_inequality_ok) {
            what << "energy inequality violated at step " << step << ": lhs " << rep.energy_lhs
                 << " > tol " << rep.energy_tol;
            throw InvariantViolation(what.str());
        }
        if (std::abs(rep.mass - mass0) > mass_rel_tol * std::abs(mass0)) {
            what << "mass drift at step " << step << ": " << rep.mass << " vs " << mass0;
            throw InvariantViolation(what.str());
        }
        if (verify && rep.energy_new > rep.energy_old) {
            what << "energy increased at step " << step << ": " << rep.energy_old << " -> "
                 << rep.energy_new;
            throw InvariantViolation(what.str());
        }
    };

    const Trajectory traj = run(data, cfg.tau, cfg.final_time, opts);
    ledger_file.flush();
    const State& last = traj.states.back();
    if (cfg.output.stride > 0 && step % cfg.output.stride != 0)
        dump_fields(cfg, data, last, step);

    std::cout << std::setprecision(12) << (verify ? "verify" : "simulate") << ": steps=" << step
              << " t=" << last.t << " energy=" << energy(last, data) << " mass=" << mass(last, data)
              << " s_min=" << last.s.minCoeff() << " s_max=" << last.s.maxCoeff()
              << (closed ? " closed" : " open") << '\n';
    return ok;
}

int convergence(const RunConfig& cfg, bool deterministic)
{
    const ManufacturedSolution exact = build_manufactured(cfg);
    const int threads = deterministic ? 1 : thread_count();

    auto spatial = [&] {
        return spatial_convergence(exact, cfg.material, cfg.rel_perm, {16, 32, 64, 128}, 0.1 / 8.0, 0.1,
                                   cfg.newton);
    };
    auto temporal = [&] {
        return temporal_convergence(exact, cfg.material, cfg.rel_perm, 256, {0.1, 0.05, 0.025}, 1.0,
                                    cfg.newton);
    };
    MmsReport report;
    if (threads > 1) {
        auto fs = std::async(std::launch::async, spatial);
        report.temporal = temporal();
        report.spatial = fs.get();
    } else {
        report.spatial = spatial();
        report.temporal = temporal();
    }

    auto out = open_output(fs::path(cfg.output.dir) / "convergence.csv");
    out << "study,cells,h,tau,steps,error_s,error_p\n" << std::setprecision(17);
    auto rows = [&](const char* name, const ConvergenceStudy& study) {
        for (const auto& s : study.samples) {
            out << name << ',' << s.cells << ',' << s.h << ',' << s.tau << ',' << s.steps << ','
                << s.error.s << ',' << s.error.p << '\n';
            std::cout << name << " cells=" << s.cells << " tau=" << s.tau << " error_s=" << s.error.s
                      << " error_p=" << s.error.p << '\n';
        }
    };
    rows("spatial", report.spatial);
    rows("temporal", report.temporal);
    std::cout << "spatial order " << report.spatial.observed_order << " (min " << spatial_order_min
              << ")\ntemporal order " << report.temporal.observed_order << " (min "
              << temporal_order_min << ")\n";

    if (report.spatial.observed_order < spatial_order_min ||
        report.temporal.observed_order < temporal_order_min) {
        std::ostringstream what;
        what << "observed orders " << report.spatial.observed_order << " / "
             << report.temporal.observed_order << " below " << spatial_order_min << " / "
             << temporal_order_min;
        return fail(invariant, "convergence_order", what.str());
    }
    return ok;
}

int table(const RunConfig& cfg)
{
    const ConstitutiveModel model(cfg.material, cfg.rel_perm);
    write_constitutive_table(std::cout, model, cfg.table.points,
                             cfg.table.s_min.value_or(cfg.material.s_eps),
                             cfg.table.s_max.value_or(1.0 - cfg.material.s_eps));
    return ok;
}

int dispatch(const Options& o, RunMode mode)
{
    try {
        if (o.deterministic)
            Eigen::setNbThreads(1);
        const RunConfig cfg = load(o, mode);
        switch (mode) {
        case RunMode::simulate: return simulate(cfg, false);
        case RunMode::verify: return simulate(cfg, true);
        case RunMode::convergence: return convergence(cfg, o.deterministic);
        case RunMode::constitutive_table: return table(cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return fail(validation, "config", e.issues().empty() ? e.what() : e.issues().front().key + ": " +
                                                                                e.issues().front().reason);
    } catch (const AdmissibilityError& e) {
        return fail(validation, "admissibility", e.what());
    } catch (const ValidationError& e) {
        return fail(validation, "validation", e.what());
    } catch (const NonConvergence& e) {
        return fail(solver, "nonconvergence", e.what());
    } catch (const LinearSolveFailure& e) {
        return fail(solver, "linear_solve", e.what());
    } catch (const ConvergenceError& e) {
        return fail(solver, "scalar_iteration", e.what());
    } catch (const InvariantViolation& e) {
        return fail(invariant, "invariant", e.what());
    } catch (const DomainError& e) {
        return fail(invariant, "domain", e.what());
    } catch (const std::exception& e) {
        return fail(solver, "internal", e.what());
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-phase porous-media flow: fully implicit energy-stable solver"};
    app.require_subcommand(1);

    Options opts;
    struct Sub
    {
        const char* name;
        const char* help;
        RunMode mode;
    };
    const Sub subs[] = {
        {"simulate", "run the time loop and write ledger.csv and field dumps", RunMode::simulate},
        {"verify", "run with every invariant asserted; nonzero exit on failure", RunMode::verify},
        {"convergence", "manufactured-solution convergence study", RunMode::convergence},
        {"constitutive-table", "constitutive functions as CSV on stdout", RunMode::constitutive_table},
    };
    RunMode selected = RunMode::simulate;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", opts.config, "INI run configuration")->check(CLI::ExistingFile);
        sub->add_option("--preset", opts.preset, "bundled preset")
            ->check(CLI::IsMember(preset_names()));
        sub->add_option("--out", opts.out, "output directory (overrides output.dir)");
        sub->add_flag("--deterministic", opts.deterministic, "serial linear algebra and dispatch");
        sub->add_option("--set", opts.overrides, "override a key: section.key=value")
            ->allow_extra_args(false);
        const RunMode mode = s.mode;
        sub->callback([&selected, mode] { selected = mode; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fail(validation, "usage", e.what());
    }
    return dispatch(opts, selected);
}
