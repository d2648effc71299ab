#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "porflow/assembly.hpp"
#include "porflow/state.hpp"

namespace porflow {

enum class LinearSolverKind { automatic, direct, iterative };

LinearSolverKind parse_linear_solver_kind(std::string_view name);
std::string_view to_string(LinearSolverKind kind);

struct LinearSolverConfig
{
    LinearSolverKind kind = LinearSolverKind::automatic;
    double tolerance = 1e-10;  ///< relative residual ||Ax-b|| / ||b||
    int max_iterations = 10000;
    int direct_limit = 20000;  ///< automatic: direct factorization up to this size

    bool operator==(const LinearSolverConfig&) const = default;
};

struct NewtonConfig
{
    double abs_tol = 1e-11;
    double rel_tol = 1e-12;
    int max_iters = 50;
    double backtrack = 0.5;
    double min_step = std::ldexp(1.0, -20);
    int fallback_depth = 6;  ///< maximum number of recursive step halvings
    LinearSolverConfig linear;

    void validate() const;
    bool operator==(const NewtonConfig&) const = default;
};

struct SolveStats
{
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
    int line_search_rejections = 0;
    int linear_iterations = 0;
    int substeps = 1;       ///< number of Newton solves chained by the fallback
    int fallback_depth = 0; ///< deepest halving level used

    void accumulate(const SolveStats& other);
};

class LinearSolveFailure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error
{
public:
    NonConvergence(const std::string& what, SolveStats stats, FieldCoefficients mu,
                   FieldCoefficients p)
        : std::runtime_error(what), stats_(stats), mu_(std::move(mu)), p_(std::move(p))
    {}

    const SolveStats& stats() const { return stats_; }
    const FieldCoefficients& last_mu() const { return mu_; }
    const FieldCoefficients& last_p() const { return p_; }

private:
    SolveStats stats_;
    FieldCoefficients mu_;
    FieldCoefficients p_;
};

struct LinearSolveResult
{
    Eigen::VectorXd x;
    int iterations = 0;  ///< Krylov iterations; 0 for a direct solve
    double relative_residual = 0.0;
};

/// Direct sparse LU up to cfg.direct_limit unknowns, diagonally
/// preconditioned BiCGSTAB above. Throws LinearSolveFailure.
LinearSolveResult linear_solve(const SparseMatrix& a, const Eigen::VectorXd& b,
                               const LinearSolverConfig& cfg);

struct StepSolution
{
    FieldCoefficients mu;
    FieldCoefficients p;
    double multiplier = 0.0;
    SolveStats stats;
};

/// Damped Newton on the coupled (mu, p) system of \p problem, starting from
/// (mu_init, p_init) with the step's Dirichlet lift applied.
StepSolution newton_step_solve(const StepProblem& problem, const FieldCoefficients& mu_init,
                               const FieldCoefficients& p_init, const NewtonConfig& cfg);

/// One step from \p old to old.t + tau, initialized from the old level.
StepSolution newton_step_solve(const State& old, double tau, const ProblemData& data,
                               const NewtonConfig& cfg);

struct FallbackHooks
{
    /// Test hook: return true to make the Newton attempt at this depth fail.
    std::function<bool(int depth, double t_old, double tau)> force_failure;
};

/// Tries a direct Newton step; on failure halves tau recursively (up to
/// cfg.fallback_depth levels) and chains the substeps to reach old.t + tau.
StepSolution continuation_fallback(const State& old, double tau, const ProblemData& data,
                                   const NewtonConfig& cfg, const FallbackHooks& hooks = {});

} // namespace porflow
