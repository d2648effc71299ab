#pragma once

#include <functional>
#include <vector>

#include "porflow/simulation.hpp"

namespace porflow {

/// A smooth 1D (S, p) pair on [0, length] with the derivatives the strong
/// form needs. Fields must stay inside [s_eps, 1-s_eps] and the fluxes must
/// vanish at both ends (homogeneous Neumann data).
struct ManufacturedSolution
{
    using Fn = std::function<double(double x, double t)>;
    double length = 1.0;
    Fn s, s_t, s_x, s_xx;
    Fn p, p_x, p_xx;
};

/// S = mean + amp cos(pi x / L) e^{-decay t}, p = p_amp cos(pi x / L) e^{-decay t}.
ManufacturedSolution cosine_manufactured(double s_mean, double s_amp, double p_amp, double decay,
                                         double length = 1.0);

/// Constant fields (zero sources).
ManufacturedSolution constant_manufactured(double s, double p = 0.0, double length = 1.0);

/// Closed-boundary 1D problem whose sources make \p exact solve the strong
/// form; unit porosity and permeability.
ProblemData manufactured_problem(const ManufacturedSolution& exact, const MaterialParams& params,
                                 RelPermKind kind, int cells);

/// L2 errors at time t of the discrete saturation S(mu_h) and pressure,
/// by 3-point Gauss quadrature per cell.
struct FieldErrors
{
    double s = 0.0;
    double p = 0.0;
};
FieldErrors l2_errors(const State& state, const ProblemData& data, const ManufacturedSolution& exact);

struct ConvergenceSample
{
    int cells = 0;
    double h = 0.0;
    double tau = 0.0;
    int steps = 0;
    FieldErrors error;
};

struct ConvergenceStudy
{
    std::vector<ConvergenceSample> samples;
    double observed_order = 0.0;  ///< least-squares slope of log(error_S)
};

/// Least-squares slope of log(errors) against log(sizes).
double observed_order(const std::vector<double>& sizes, const std::vector<double>& errors);

/// Meshes \p cells with tau = tau_ref (h / h_ref)^2, h_ref the coarsest cell size.
ConvergenceStudy spatial_convergence(const ManufacturedSolution& exact, const MaterialParams& params,
                                     RelPermKind kind, const std::vector<int>& cells, double tau_ref,
                                     double final_time, const NewtonConfig& cfg = {});

/// Fixed mesh, the given step sizes.
ConvergenceStudy temporal_convergence(const ManufacturedSolution& exact, const MaterialParams& params,
                                      RelPermKind kind, int cells, const std::vector<double>& taus,
                                      double final_time, const NewtonConfig& cfg = {});

struct MmsReport
{
    ConvergenceStudy spatial;
    ConvergenceStudy temporal;
};

/// Both studies with the standard families: meshes {16, 32, 64, 128} at
/// tau ~ h^2, and tau in {1/10, 1/20, 1/40} on 256 cells.
MmsReport mms_convergence(const ManufacturedSolution& exact, const MaterialParams& params,
                          RelPermKind kind, const NewtonConfig& cfg = {});

} // namespace porflow
