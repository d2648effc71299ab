#pragma once

#include <optional>

#include "porflow/assembly.hpp"
#include "porflow/solver.hpp"
#include "porflow/state.hpp"

namespace porflow {

/**
 * Per-step ledger entry.
 *
 * energy_lhs collects E^{k+1} - E^k + convexity_sum + diss_n + diss_w and
 * energy_rhs the boundary/source work pairing (zero for closed systems);
 * the discrete energy estimate reads energy_lhs <= energy_rhs.
 */
struct StepReport
{
    double t_new = 0.0;
    double tau = 0.0;
    double energy_old = 0.0;
    double energy_new = 0.0;
    double convexity_sum = 0.0;            ///< (phi_m c_min / 2) ||S_new - S_old||^2
    double convexity_sum_pointwise = 0.0;  ///< sum of phi (c_min / 2) (S_new - S_old)^2
    double diss_n = 0.0;                   ///< tau (lambda_n K grad p, grad p)
    double diss_w = 0.0;                   ///< tau (lambda_w K grad(p+mu), grad(p+mu))
    double mass = 0.0;                     ///< (phi, S_new)
    double s_min = 0.0;
    double s_max = 0.0;
    double mu_grad_max = 0.0;
    double energy_lhs = 0.0;
    double energy_rhs = 0.0;
    double energy_tol = 0.0;
    bool closed = false;
    std::optional<bool> energy_inequality_ok;  ///< set for closed systems only
    SolveStats solver;
};

/// (phi, F(S)) by the assembly quadrature, S = S(mu_h(x_q)).
double energy(const State& state, const ProblemData& data);

/// (phi, S) by the assembly quadrature.
double mass(const State& state, const ProblemData& data);

/// Max over quadrature points of |grad mu|.
double mu_gradient_max(const State& state, const ProblemData& data);

/// Stiffness matrix of (lambda_alpha(S) K grad u, grad v) over all nodes,
/// mobility taken at S(mu_h(x_q)) of \p state.
SparseMatrix mobility_stiffness(const State& state, const ProblemData& data, Phase phase);

StepReport step_report(const State& old_state, const State& new_state, double tau,
                       const ProblemData& data, const SolveStats& stats = {});

struct PressureTransforms
{
    FieldCoefficients psi;    ///< artificial pressure p + shift(S)
    FieldCoefficients theta;  ///< complementary pressure
};

/// Nodal psi and theta. Throws InvariantViolation if a nodal saturation does
/// not round-trip through the chemical potential.
PressureTransforms pressure_transforms(const State& state, const ProblemData& data);

} // namespace porflow
