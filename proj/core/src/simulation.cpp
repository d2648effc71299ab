#include "porflow/simulation.hpp"

#include <cmath>
#include <sstream>

#include "porflow/errors.hpp"

namespace porflow {

std::vector<double> step_sizes(double tau, double final_time)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("time step must be positive");
    if (!(final_time >= 0.0) || !std::isfinite(final_time))
        throw ValidationError("final time must be non-negative");
    const double tol = 1e-12 * std::max(1.0, final_time);
    const double ratio = final_time / tau;
    const double rounded = std::round(ratio);
    std::vector<double> steps;
    if (std::abs(rounded * tau - final_time) <= tol) {
        steps.assign(static_cast<std::size_t>(rounded), tau);
        return steps;
    }
    const auto n = static_cast<std::size_t>(std::floor(ratio));
    steps.assign(n, tau);
    const double rest = final_time - static_cast<double>(n) * tau;
    if (rest > tol)
        steps.push_back(rest);
    return steps;
}

State initialize(const ProblemData& data, const LinearSolverConfig& linear)
{
    data.validate();
    const Mesh& mesh = data.mesh;
    const auto& model = data.model;
    FieldCoefficients mu0 =
        interpolate([&](const Point& x) { return data.initial_mu(x, 0.0); }, mesh);
    if (!mu0.allFinite())
        throw ValidationError("initial potential is not finite at every node");

    const double lo = model.s_eps();
    const double hi = 1.0 - lo;
    for (Eigen::Index i = 0; i < mu0.size(); ++i) {
        const double s = model.invert_mu(mu0[i]);
        if (s < lo - 1e-12 || s > hi + 1e-12) {
            std::ostringstream os;
            os << "Assumption 4: initial saturation " << s << " at node " << i
               << " outside [s_eps, 1-s_eps] = [" << lo << ", " << hi << "]";
            throw ValidationError(os.str());
        }
    }

    // Pressure equation at t = 0 with mu frozen; it is linear in p.
    const StepProblem problem(data, quadrature_saturation(data, mu0), 1.0, 0.0, 0.0);
    FieldCoefficients p_start = problem.p_lift();
    const Eigen::VectorXd x = problem.pack(mu0, p_start);
    const int nf = problem.free_node_count();
    const int np = problem.size() - nf;
    const Eigen::VectorXd r = problem.residual(x);
    const SparseMatrix j = problem.jacobian(x);
    SparseMatrix jpp = j.bottomRightCorner(np, np);
    const LinearSolveResult sol = linear_solve(jpp, -r.tail(np), linear);
    Eigen::VectorXd x_new = x;
    x_new.tail(np) += sol.x;

    FieldCoefficients mu_unused;
    FieldCoefficients p0;
    problem.unpack(x_new, mu_unused, p0);
    // Keep the user's nodal mu^0 (including any gamma1 values).
    return make_state(data, 0.0, std::move(mu0), std::move(p0));
}

namespace {

void check_state(const State& st, const ProblemData& data, const RunOptions& opts,
                 const Trajectory& traj)
{
    const auto& model = data.model;
    const double lo = model.s_eps() - opts.bounds_tol;
    const double hi = 1.0 - model.s_eps() + opts.bounds_tol;
    for (Eigen::Index i = 0; i < st.s.size(); ++i) {
        const double s = st.s[i];
        if (s < lo || s > hi) {
            std::ostringstream os;
            os.precision(17);
            os << "saturation bound violated at t = " << st.t << ", node " << i << ": S = " << s
               << " outside [" << model.s_eps() << ", " << 1.0 - model.s_eps() << "]";
            throw RunAborted(os.str(), traj);
        }
        const double back = model.chemical_potential(s);
        if (std::abs(back - st.mu[i]) > opts.consistency_tol * std::max(1.0, std::abs(st.mu[i]))) {
            std::ostringstream os;
            os << "nodal consistency violated at t = " << st.t << ", node " << i;
            throw RunAborted(os.str(), traj);
        }
    }
}

} // namespace

Trajectory run(const ProblemData& data, double tau, double final_time, const RunOptions& opts)
{
    const std::vector<double> steps = step_sizes(tau, final_time);
    Trajectory traj;
    State current = initialize(data, opts.newton.linear);
    traj.states.push_back(current);

    double t = 0.0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const double dt = steps[k];
        StepSolution sol = continuation_fallback(current, dt, data, opts.newton, opts.hooks);
        // Uniform steps land on exact multiples of tau.
        t = (k + 1 < steps.size() || steps.back() == tau) ? static_cast<double>(k + 1) * tau
                                                           : final_time;
        State next = make_state(data, t, std::move(sol.mu), std::move(sol.p));
        StepReport rep = step_report(current, next, dt, data, sol.stats);
        if (opts.on_step)
            opts.on_step(next, rep);
        if (opts.keep_states)
            traj.states.push_back(next);
        traj.reports.push_back(rep);
        check_state(next, data, opts, traj);
        current = std::move(next);
    }
    if (!opts.keep_states && traj.states.back().t != current.t)
        traj.states.push_back(current);
    return traj;
}

} // namespace porflow
