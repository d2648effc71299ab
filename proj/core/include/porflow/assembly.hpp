#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "porflow/constitutive.hpp"
#include "porflow/mesh.hpp"

namespace porflow {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SpaceTimeFunction = std::function<double(const Point&, double t)>;

/**
 * A coefficient f(x, t, S) depending on saturation: sources q_w, q_n and the
 * Neumann data phi_2, phi_4. Assembly evaluates it at the clamped saturation
 * and treats its S-derivative as zero outside [s_eps, 1-s_eps].
 */
class SaturationFunction
{
public:
    using Fn = std::function<double(const Point&, double t, double s)>;

    SaturationFunction() = default;  ///< identically zero

    static SaturationFunction constant(double c);
    static SaturationFunction of_saturation(std::function<double(double)> f,
                                            std::function<double(double)> df);
    static SaturationFunction general(Fn f, Fn df = {});

    bool is_zero() const { return !value_; }
    double value(const Point& x, double t, double s) const { return value_ ? value_(x, t, s) : 0.0; }
    double derivative(const Point& x, double t, double s) const
    {
        return derivative_ ? derivative_(x, t, s) : 0.0;
    }

private:
    Fn value_;
    Fn derivative_;
};

/// Symmetric 2x2 permeability tensor per cell. 1D meshes use only xx.
struct Permeability
{
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;
};

/// Everything defining one run of the model except the time grid.
struct ProblemData
{
    ProblemData(Mesh mesh, ConstitutiveModel model);

    Mesh mesh;
    ConstitutiveModel model;
    std::vector<double> porosity;            ///< per cell
    std::vector<Permeability> permeability;  ///< per cell, SPD
    SaturationFunction q_w;
    SaturationFunction q_n;
    SaturationFunction flux_n;  ///< phi_2 on gamma2
    SaturationFunction flux_w;  ///< phi_4 on gamma2
    SpaceTimeFunction mu_dirichlet;  ///< phi_1 on gamma1
    SpaceTimeFunction p_dirichlet;   ///< phi_3 on gamma1
    SpaceTimeFunction initial_mu;

    /// Zero sources, homogeneous Neumann data and no Dirichlet boundary.
    bool is_closed() const;

    /// Throws ValidationError on inconsistent sizes, porosity below phi_m or
    /// an indefinite permeability.
    void validate() const;

    /// (K_min, K_max): extreme eigenvalues of the permeability over all cells.
    std::pair<double, double> permeability_bounds() const;
};

struct StepResidual
{
    Eigen::VectorXd r_mu;
    Eigen::VectorXd r_p;
    std::optional<double> r_mean;

    double norm() const;
    Eigen::VectorXd stacked() const;
};

struct JacobianOptions
{
    /// Drop the dlambda/dS chain-rule terms.
    bool freeze_mobility = false;
};

/**
 * The nonlinear map of one fully implicit step, restricted to the free
 * degrees of freedom.
 *
 * Unknown layout: [mu at free nodes | p at free nodes | mean multiplier].
 * Free nodes are the nodes not on gamma1; their Dirichlet values are
 * overwritten with phi_1, phi_3 sampled at the step midpoint. The multiplier
 * exists only when the mesh has no gamma1 face and enforces zero mean p.
 *
 * The previous saturation enters at quadrature points, so the storage term
 * pairs S(mu_new(x_q)) with the same S(mu_old(x_q)) the energy uses.
 */
class StepProblem
{
public:
    StepProblem(const ProblemData& data, QuadratureField s_old, double tau, double t_new);
    /// Dirichlet lift sampled at \p lift_time instead of the step midpoint.
    StepProblem(const ProblemData& data, QuadratureField s_old, double tau, double t_new,
                double lift_time);

    const ProblemData& data() const { return *data_; }
    double tau() const { return tau_; }
    double t_new() const { return t_new_; }
    const QuadratureField& s_old() const { return s_old_; }

    int free_node_count() const { return free_count_; }
    bool has_multiplier() const { return !data_->mesh.has_dirichlet(); }
    int size() const { return 2 * free_count_ + (has_multiplier() ? 1 : 0); }
    int free_index(int node) const { return free_index_[static_cast<std::size_t>(node)]; }

    const FieldCoefficients& mu_lift() const { return mu_lift_; }
    const FieldCoefficients& p_lift() const { return p_lift_; }

    Eigen::VectorXd pack(const FieldCoefficients& mu, const FieldCoefficients& p,
                         double multiplier = 0.0) const;
    /// Full nodal fields with the Dirichlet lift applied.
    void unpack(const Eigen::VectorXd& x, FieldCoefficients& mu, FieldCoefficients& p) const;

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
    SparseMatrix jacobian(const Eigen::VectorXd& x, const JacobianOptions& opts = {}) const;
    StepResidual split(const Eigen::VectorXd& r) const;

    /// Mean-constraint weights int(N_a)/|Omega| for every node.
    const std::vector<double>& mean_weights() const { return mean_weights_; }

private:
    void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* r,
                  std::vector<Eigen::Triplet<double>>* jac, const JacobianOptions& opts) const;

    const ProblemData* data_;
    QuadratureField s_old_;
    double tau_;
    double t_new_;
    int free_count_ = 0;
    std::vector<int> free_index_;
    std::vector<int> free_nodes_;
    FieldCoefficients mu_lift_;
    FieldCoefficients p_lift_;
    std::vector<double> mean_weights_;
};

/// Quadrature-point saturation S(mu(x_q)) of a nodal potential.
QuadratureField quadrature_saturation(const ProblemData& data, const FieldCoefficients& mu);

/// Residual at (mu_new, p_new) with a zero mean multiplier. Dirichlet nodes
/// are taken from the step lift.
StepResidual assemble_residual(const FieldCoefficients& mu_new, const FieldCoefficients& p_new,
                               const QuadratureField& s_old, double tau, const ProblemData& data,
                               double t_new);

SparseMatrix assemble_jacobian(const FieldCoefficients& mu_new, const FieldCoefficients& p_new,
                               const QuadratureField& s_old, double tau, const ProblemData& data,
                               double t_new, const JacobianOptions& opts = {});

struct Assumption4Report
{
    bool pass = true;
    std::vector<std::string> violations;
};

/// Evaluates the four source/flux sign conditions at S = s_eps and
/// S = 1 - s_eps over all nodes and \p times, and the range condition
/// mu_w(s_eps) <= phi_1 <= mu_w(1 - s_eps) at gamma1 nodes.
Assumption4Report check_assumption4(const ProblemData& data, std::span<const double> times);

/// "row col value" lines, 1-based, preceded by a "rows cols nnz" header.
void write_triplets(std::ostream& os, const SparseMatrix& a);

} // namespace porflow
