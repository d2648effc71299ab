#pragma once

#include <functional>
#include <vector>

#include "porflow/diagnostics.hpp"
#include "porflow/solver.hpp"
#include "porflow/state.hpp"

namespace porflow {

struct Trajectory
{
    std::vector<State> states;
    std::vector<StepReport> reports;  ///< reports[k] describes states[k] -> states[k+1]
};

/// Thrown when a monitored invariant fails mid-run; carries the states
/// computed so far, including the offending one.
class RunAborted : public InvariantViolation
{
public:
    RunAborted(const std::string& what, Trajectory partial)
        : InvariantViolation(what), partial_(std::move(partial))
    {}

    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

struct RunOptions
{
    NewtonConfig newton;
    double bounds_tol = 1e-10;       ///< allowed excursion beyond [s_eps, 1-s_eps]
    double consistency_tol = 1e-10;  ///< |mu(S_i) - mu_i| relative to max(1, |mu_i|)
    bool keep_states = true;         ///< store every State in the returned Trajectory
    FallbackHooks hooks;
    /// Called after every accepted step, before the invariant monitors run.
    std::function<void(const State&, const StepReport&)> on_step;
};

/// Step sizes covering [0, T]: uniform tau plus a final short step when tau
/// does not divide T within 1e-12.
std::vector<double> step_sizes(double tau, double final_time);

/// Initial state: nodal mu^0, S^0 = S(mu^0) and a pressure from one linear
/// solve of the pressure equation with mu frozen at mu^0. Rejects S^0
/// outside [s_eps, 1-s_eps] with ValidationError.
State initialize(const ProblemData& data, const LinearSolverConfig& linear = {});

/// Marches the fully implicit scheme from t = 0 to \p final_time.
Trajectory run(const ProblemData& data, double tau, double final_time, const RunOptions& opts = {});

} // namespace porflow
