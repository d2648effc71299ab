#include "porflow/solver.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "porflow/errors.hpp"

namespace porflow {

State make_state(const ProblemData& data, double t, FieldCoefficients mu, FieldCoefficients p)
{
    State st;
    st.t = t;
    st.s.resize(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        st.s[i] = data.model.invert_mu(mu[i]);
    st.mu = std::move(mu);
    st.p = std::move(p);
    return st;
}

LinearSolverKind parse_linear_solver_kind(std::string_view name)
{
    if (name == "automatic" || name == "auto")
        return LinearSolverKind::automatic;
    if (name == "direct")
        return LinearSolverKind::direct;
    if (name == "iterative")
        return LinearSolverKind::iterative;
    throw ValidationError("unknown linear solver '" + std::string(name) + "'");
}

std::string_view to_string(LinearSolverKind kind)
{
    switch (kind) {
    case LinearSolverKind::automatic: return "automatic";
    case LinearSolverKind::direct: return "direct";
    case LinearSolverKind::iterative: return "iterative";
    }
    return "?";
}

void NewtonConfig::validate() const
{
    if (!(abs_tol > 0.0) || !(rel_tol >= 0.0))
        throw ValidationError("Newton tolerances must be positive");
    if (max_iters < 1)
        throw ValidationError("Newton max_iters must be at least 1");
    if (!(backtrack > 0.0 && backtrack < 1.0))
        throw ValidationError("backtracking factor must lie in (0,1)");
    if (!(min_step > 0.0 && min_step <= 1.0))
        throw ValidationError("minimum line-search step must lie in (0,1]");
    if (fallback_depth < 0)
        throw ValidationError("fallback depth must be non-negative");
    if (!(linear.tolerance > 0.0) || linear.max_iterations < 1)
        throw ValidationError("linear solver tolerance and iteration limit must be positive");
}

void SolveStats::accumulate(const SolveStats& other)
{
    iterations += other.iterations;
    line_search_rejections += other.line_search_rejections;
    linear_iterations += other.linear_iterations;
    final_residual = std::max(final_residual, other.final_residual);
    fallback_depth = std::max(fallback_depth, other.fallback_depth);
}

LinearSolveResult linear_solve(const SparseMatrix& a, const Eigen::VectorXd& b,
                               const LinearSolverConfig& cfg)
{
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw LinearSolveFailure("linear_solve: dimension mismatch");
    LinearSolveResult out;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.x = Eigen::VectorXd::Zero(b.size());
        return out;
    }

    const bool direct = cfg.kind == LinearSolverKind::direct ||
                        (cfg.kind == LinearSolverKind::automatic && a.rows() <= cfg.direct_limit);
    if (direct) {
        SparseMatrix ac = a;
        ac.makeCompressed();
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(ac);
        if (lu.info() != Eigen::Success)
            throw LinearSolveFailure("sparse LU factorization failed: " + lu.lastErrorMessage());
        out.x = lu.solve(b);
        // One step of iterative refinement.
        Eigen::VectorXd r = b - ac * out.x;
        out.relative_residual = r.norm() / bnorm;
        if (out.relative_residual > cfg.tolerance) {
            out.x += lu.solve(r);
            out.relative_residual = (b - ac * out.x).norm() / bnorm;
        }
    }
    else {
        Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> krylov;
        krylov.setTolerance(cfg.tolerance);
        krylov.setMaxIterations(cfg.max_iterations);
        krylov.compute(a);
        out.x = krylov.solve(b);
        out.iterations = static_cast<int>(krylov.iterations());
        out.relative_residual = (b - a * out.x).norm() / bnorm;
        if (krylov.info() == Eigen::NumericalIssue)
            throw LinearSolveFailure("BiCGSTAB breakdown after " + std::to_string(out.iterations) +
                                     " iterations");
    }
    if (!std::isfinite(out.relative_residual) || out.relative_residual > cfg.tolerance) {
        std::ostringstream os;
        os << "linear solve stagnated: relative residual " << out.relative_residual
           << " > tolerance " << cfg.tolerance << " (" << (direct ? "direct" : "BiCGSTAB")
           << ", " << out.iterations << " iterations)";
        throw LinearSolveFailure(os.str());
    }
    return out;
}

namespace {

bool try_residual(const StepProblem& problem, const Eigen::VectorXd& x, Eigen::VectorXd& r)
{
    try {
        r = problem.residual(x);
    }
    catch (const DomainError&) {
        return false;
    }
    catch (const ConvergenceError&) {
        return false;
    }
    return r.allFinite();
}

} // namespace

StepSolution newton_step_solve(const StepProblem& problem, const FieldCoefficients& mu_init,
                               const FieldCoefficients& p_init, const NewtonConfig& cfg)
{
    cfg.validate();
    SolveStats stats;
    Eigen::VectorXd x = problem.pack(mu_init, p_init);
    Eigen::VectorXd r;
    if (!try_residual(problem, x, r))
        throw NonConvergence("residual not evaluable at the initial guess", stats, mu_init, p_init);
    double norm = r.norm();
    stats.initial_residual = norm;
    const double target = cfg.abs_tol + cfg.rel_tol * norm;

    auto fail = [&](const std::string& why) {
        stats.final_residual = norm;
        FieldCoefficients mu;
        FieldCoefficients p;
        problem.unpack(x, mu, p);
        std::ostringstream os;
        os << "Newton: " << why << " (iterations " << stats.iterations << ", residual " << norm
           << ", target " << target << ")";
        return NonConvergence(os.str(), stats, mu, p);
    };

    while (norm > target) {
        if (stats.iterations >= cfg.max_iters)
            throw fail("iteration limit reached");
        const SparseMatrix j = problem.jacobian(x);
        const LinearSolveResult lin = linear_solve(j, -r, cfg.linear);
        stats.linear_iterations += lin.iterations;
        ++stats.iterations;

        double step = 1.0;
        Eigen::VectorXd x_try;
        Eigen::VectorXd r_try;
        for (;;) {
            x_try = x + step * lin.x;
            if (try_residual(problem, x_try, r_try) && r_try.norm() < norm)
                break;
            ++stats.line_search_rejections;
            step *= cfg.backtrack;
            if (step < cfg.min_step)
                throw fail("line search failed to reduce the residual");
        }
        x = std::move(x_try);
        r = std::move(r_try);
        norm = r.norm();
    }

    StepSolution out;
    problem.unpack(x, out.mu, out.p);
    out.multiplier = problem.has_multiplier() ? x[problem.size() - 1] : 0.0;
    stats.final_residual = norm;
    out.stats = stats;
    return out;
}

StepSolution newton_step_solve(const State& old, double tau, const ProblemData& data,
                               const NewtonConfig& cfg)
{
    const StepProblem problem(data, quadrature_saturation(data, old.mu), tau, old.t + tau);
    return newton_step_solve(problem, old.mu, old.p, cfg);
}

namespace {

StepSolution solve_interval(const State& old, double tau, const ProblemData& data,
                            const NewtonConfig& cfg, const FallbackHooks& hooks, int depth)
{
    std::string failure;
    SolveStats failed_stats;
    FieldCoefficients last_mu = old.mu;
    FieldCoefficients last_p = old.p;
    try {
        if (hooks.force_failure && hooks.force_failure(depth, old.t, tau))
            throw NonConvergence("forced failure", SolveStats{}, old.mu, old.p);
        StepSolution sol = newton_step_solve(old, tau, data, cfg);
        sol.stats.fallback_depth = depth;
        return sol;
    }
    catch (const NonConvergence& e) {
        failure = e.what();
        failed_stats = e.stats();
        last_mu = e.last_mu();
        last_p = e.last_p();
    }
    catch (const LinearSolveFailure& e) {
        failure = e.what();
    }
    if (depth >= cfg.fallback_depth) {
        std::ostringstream os;
        os << failure << "; step halving exhausted at depth " << depth << " (tau = " << tau << ")";
        failed_stats.fallback_depth = depth;
        throw NonConvergence(os.str(), failed_stats, last_mu, last_p);
    }

    const double half = 0.5 * tau;
    StepSolution first = solve_interval(old, half, data, cfg, hooks, depth + 1);
    const State mid = make_state(data, old.t + half, first.mu, first.p);
    StepSolution second = solve_interval(mid, half, data, cfg, hooks, depth + 1);

    StepSolution out = second;
    out.stats = first.stats;
    out.stats.accumulate(second.stats);
    out.stats.substeps = first.stats.substeps + second.stats.substeps;
    out.stats.line_search_rejections += failed_stats.line_search_rejections;
    out.stats.iterations += failed_stats.iterations;
    return out;
}

} // namespace

StepSolution continuation_fallback(const State& old, double tau, const ProblemData& data,
                                   const NewtonConfig& cfg, const FallbackHooks& hooks)
{
    cfg.validate();
    return solve_interval(old, tau, data, cfg, hooks, 0);
}

} // namespace porflow
