// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "porflow/config.hpp"
#include "porflow/mms.hpp"
#include "porflow/simulation.hpp"
#include "support.hpp"

using namespace porflow;
namespace oracle = porflow::fixtures::oracle;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// 1. Constitutive exactness.
Outcome constitutive_exactness()
{
    constexpr double fd_tol = 1e-6;
    constexpr double inv_tol = 1e-12;
    MaterialParams p{1.3, 0.7, 0.6};
    ConstitutiveModel m(p);
    double fd_err = 0.0;
    for (int i = 1; i < 1000; ++i) {
        const double s = i / 1000.0;
        const double h = 1e-6 * std::min(s, 1.0 - s);
        const double dF = (m.free_energy(s + h) - m.free_energy(s - h)) / (2 * h);
        const double dmu = (m.chemical_potential(s + h) - m.chemical_potential(s - h)) / (2 * h);
        fd_err = std::max(fd_err, fixtures::rel_diff(dF, m.chemical_potential(s)));
        fd_err = std::max(fd_err, fixtures::rel_diff(dmu, m.dmu_dS(s)));
    }
    double inv_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double s = p.s_eps + (1.0 - 2.0 * p.s_eps) * i / 999.0;
        inv_err = std::max(inv_err, std::abs(m.invert_mu(m.chemical_potential(s)) - s));
    }
    return {fd_err <= fd_tol && inv_err <= inv_tol,
            fmt("max FD rel err %.2e (<= 1e-6), max round-trip err %.2e (<= 1e-12)", fd_err, inv_err)};
}

// 2. Convexity inequality.
Outcome convexity_inequality()
{
    constexpr double tol = 1e-14;
    ConstitutiveModel m({1.0, 1.0, 0.8});
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(1e-3, 1.0 - 1e-3);
    double worst = -INFINITY;
    double worst_eq = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double s0 = u(rng);
        const double s1 = u(rng);
        worst = std::max(worst, m.convexity_gap(s0, s1, m.chemical_potential(s1)));
        worst_eq = std::max(worst_eq, std::abs(m.convexity_gap(s0, s0, m.chemical_potential(s0))));
    }
    return {worst <= tol && worst_eq <= tol,
            fmt("max gap %.2e (<= 1e-14), max |gap| at equal pair %.2e (<= 1e-14)", worst, worst_eq)};
}

// 3. Admissibility gate.
Outcome admissibility_gate()
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> g(0.05, 20.0);
    int rejected_square = 0;
    int rejected_critical = 0;
    int accepted_below = 0;
    auto rejects = [](MaterialParams p) {
        try {
            check_admissibility(p);
            return false;
        } catch (const AdmissibilityError&) {
            return true;
        }
    };
    for (int i = 0; i < 100; ++i) {
        MaterialParams p{g(rng), g(rng), 0.0};
        const double square = std::pow(std::sqrt(p.gamma_w) + std::sqrt(p.gamma_n), 2);
        p.gamma_wn = square;
        rejected_square += rejects(p);
        // Margin exactly zero.
        p.gamma_wn = 0.5 * square;
        rejected_critical += rejects(p);
        p.gamma_wn = 0.5 * square * (1.0 - 1e-9);
        accepted_below += !rejects(p);
    }
    return {rejected_square == 100 && rejected_critical == 100 && accepted_below == 100,
            fmt("rejected at (sqrt(gw)+sqrt(gn))^2: %.0f/100, rejected at zero margin: %.0f/100, "
                "accepted below zero margin: %.0f/100",
                rejected_square, rejected_critical, accepted_below)};
}

// 4. Oracle equivalence on the two-cell closed system.
Outcome oracle_equivalence()
{
    constexpr double unknown_tol = 1e-8;
    constexpr double residual_tol = 1e-12;
    const ProblemData data = fixtures::closed_cosine_1d(2);
    const State s0 = initialize(data);
    oracle::Closed1d o;
    o.cells = 2;
    o.tau = 0.1;
    o.s_old = o.at_gauss_saturation(s0.mu);

    NewtonConfig cfg;
    cfg.abs_tol = 1e-14;
    cfg.rel_tol = 0.0;
    const StepSolution sol = newton_step_solve(s0, o.tau, data, cfg);
    Eigen::VectorXd x0(o.size());
    x0 << s0.mu, s0.p, 0.0;
    const Eigen::VectorXd xo = o.solve(x0);

    double diff = 0.0;
    for (int i = 0; i < 3; ++i) {
        diff = std::max(diff, std::abs(sol.mu[i] - xo[i]));
        diff = std::max(diff, std::abs(sol.p[i] - xo[3 + i]));
    }
    diff = std::max(diff, std::abs(sol.multiplier - xo[6]));
    StepProblem prob(data, quadrature_saturation(data, s0.mu), o.tau, o.tau);
    const double r_newton = prob.residual(prob.pack(sol.mu, sol.p, sol.multiplier)).norm();
    const double r_oracle = o.residual(xo).norm();
    return {diff <= unknown_tol && r_newton <= residual_tol && r_oracle <= residual_tol,
            fmt("max unknown diff %.2e (<= 1e-8), residuals newton %.2e oracle %.2e (<= 1e-12)", diff,
                r_newton, r_oracle)};
}

struct RunSummary
{
    std::string name;
    int steps = 0;
    double worst_energy_excess = -INFINITY;  ///< max of lhs - tol
    double worst_energy_rise = -INFINITY;    ///< max of E^{k+1} - E^k
    double s_min = INFINITY;
    double s_max = -INFINITY;
    double mass_drift = 0.0;                 ///< relative
    bool closed = false;
    std::string error;
};

RunSummary run_preset(const char* name)
{
    RunSummary out;
    out.name = name;
    try {
        const RunConfig cfg = preset_config(name);
        const ProblemData data = build_problem(cfg);
        out.closed = data.is_closed();
        RunOptions opts;
        opts.newton = cfg.newton;
        opts.keep_states = false;
        const State s0 = initialize(data, cfg.newton.linear);
        const double m0 = mass(s0, data);
        out.s_min = s0.s.minCoeff();
        out.s_max = s0.s.maxCoeff();
        opts.on_step = [&](const State& s, const StepReport& r) {
            ++out.steps;
            out.worst_energy_excess = std::max(out.worst_energy_excess, r.energy_lhs - r.energy_tol);
            out.worst_energy_rise = std::max(out.worst_energy_rise, r.energy_new - r.energy_old);
            out.s_min = std::min(out.s_min, s.s.minCoeff());
            out.s_max = std::max(out.s_max, s.s.maxCoeff());
            out.mass_drift = std::max(out.mass_drift, std::abs(r.mass - m0) / m0);
        };
        run(data, cfg.tau, cfg.final_time, opts);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

struct Runs
{
    RunSummary closed_1d = run_preset("closed_1d");
    RunSummary closed_2d = run_preset("closed_2d");
};

Runs& closed_runs()
{
    static Runs runs;
    return runs;
}

// 5. Energy stability.
Outcome energy_stability()
{
    const Runs& r = closed_runs();
    bool pass = true;
    std::ostringstream os;
    for (const RunSummary* s : {&r.closed_1d, &r.closed_2d}) {
        pass = pass && s->error.empty() && s->closed && s->steps == 100 && s->worst_energy_excess <= 0.0 &&
               s->worst_energy_rise <= 0.0;
        os << s->name << ": " << s->steps << " steps, max(lhs - tol) "
           << fmt("%.2e", s->worst_energy_excess) << ", max energy rise "
           << fmt("%.2e", s->worst_energy_rise) << (s->error.empty() ? "" : " error: " + s->error) << "; ";
    }
    return {pass, os.str()};
}

// 6. Maximum principle.
Outcome maximum_principle()
{
    constexpr double slack = 1e-10;
    const Runs& r = closed_runs();
    const RunSummary driven = run_preset("driven_dirichlet_1d");
    const double lo = MaterialParams{}.s_eps - slack;
    const double hi = 1.0 - MaterialParams{}.s_eps + slack;
    bool pass = true;
    std::ostringstream os;
    for (const RunSummary* s : {&r.closed_1d, &r.closed_2d, &driven}) {
        pass = pass && s->error.empty() && s->steps == 100 && s->s_min >= lo && s->s_max <= hi;
        os << s->name << ": S in " << fmt("[%.6f, %.6f]", s->s_min, s->s_max) << "; ";
    }
    return {pass, os.str()};
}

// 7. Mass conservation.
Outcome mass_conservation()
{
    constexpr double tol = 1e-10;
    const Runs& r = closed_runs();
    bool pass = true;
    std::ostringstream os;
    for (const RunSummary* s : {&r.closed_1d, &r.closed_2d}) {
        pass = pass && s->error.empty() && s->steps == 100 && s->mass_drift <= tol;
        os << s->name << ": max relative drift " << fmt("%.2e", s->mass_drift) << " (<= 1e-10); ";
    }
    return {pass, os.str()};
}

// 8. Jacobian correctness.
Outcome jacobian_correctness()
{
    constexpr double tol = 1e-5;
    const ProblemData data = fixtures::closed_cosine_1d(8);
    const State s0 = initialize(data);
    StepProblem prob(data, quadrature_saturation(data, s0.mu), 0.01, 0.01);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> us(0.15, 0.85);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        FieldCoefficients mu(9), p(9);
        for (int i = 0; i < 9; ++i) {
            mu[i] = data.model.chemical_potential(us(rng));
            p[i] = n(rng);
        }
        const Eigen::VectorXd x = prob.pack(mu, p, n(rng));
        Eigen::VectorXd v(x.size());
        for (int i = 0; i < v.size(); ++i)
            v[i] = n(rng);
        const double eps = 1e-6;
        const Eigen::VectorXd fd = (prob.residual(x + eps * v) - prob.residual(x - eps * v)) / (2 * eps);
        worst = std::max(worst, (prob.jacobian(x) * v - fd).norm() / fd.norm());
    }
    return {worst <= tol, fmt("max directional rel err %.2e over 20 states (<= 1e-5)", worst)};
}

// 9. MMS convergence.
Outcome mms()
{
    constexpr double spatial_min = 1.8;
    constexpr double temporal_min = 0.8;
    const RunConfig cfg = preset_config("mms_1d");
    const MmsReport r = mms_convergence(build_manufactured(cfg), cfg.material, cfg.rel_perm, cfg.newton);
    return {r.spatial.observed_order >= spatial_min && r.temporal.observed_order >= temporal_min,
            fmt("spatial order %.3f (>= 1.8), temporal order %.3f (>= 0.8)", r.spatial.observed_order,
                r.temporal.observed_order)};
}

// 10. Pressure transforms.
Outcome transform_quadrature()
{
    constexpr double tol = 1e-8;
    MaterialParams p{1.0, 1.5, 0.6};
    ConstitutiveModel m(p);
    auto trapezoid = [](auto f, double a, double b) {
        const int n = 1000000;
        const double h = (b - a) / n;
        double sum = 0.5 * (f(a) + f(b));
        for (int i = 1; i < n; ++i)
            sum += f(a + i * h);
        return sum * h;
    };
    auto shift = [&](double s) { return m.mobility(s, Phase::wetting) / m.total_mobility(s) * m.dmu_dS(s); };
    auto theta = [&](double s) {
        return m.mobility(s, Phase::wetting) * m.mobility(s, Phase::nonwetting) / m.total_mobility(s) *
               m.dmu_dS(s);
    };
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i) {
        const double s = p.s_eps + (1.0 - 2.0 * p.s_eps) * i / 10.0;
        worst = std::max(worst, std::abs(m.artificial_pressure_shift(s) - trapezoid(shift, p.s_eps, s)));
        worst = std::max(worst, std::abs(m.complementary_pressure(s) - trapezoid(theta, p.s_eps, s)));
    }
    const double at_eps = m.complementary_pressure(p.s_eps);
    return {worst <= tol && at_eps == 0.0,
            fmt("max |quadrature - trapezoid| %.2e (<= 1e-8), theta(s_eps) = %g", worst, at_eps)};
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const Criterion criteria[] = {
        {1, "constitutive exactness", 1.0, constitutive_exactness},
        {2, "convexity inequality", 1.0, convexity_inequality},
        {3, "admissibility gate", 1.0, admissibility_gate},
        {4, "oracle equivalence", 1.0, oracle_equivalence},
        {5, "energy stability", 30.0, energy_stability},
        {6, "maximum principle", 10.0, maximum_principle},
        {7, "mass conservation", 1.0, mass_conservation},
        {8, "jacobian correctness", 5.0, jacobian_correctness},
        {9, "mms convergence", 120.0, mms},
        {10, "pressure transforms", 5.0, transform_quadrature},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = o.pass && in_budget;
        failures += !pass;
        std::printf("%s criterion %d (%s): %s [%.2f s, budget %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s);
    }
    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
