#include "porflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "porflow/errors.hpp"

namespace porflow {

namespace {

struct PointValues
{
    double weight;
    Point x;
    double phi;
    const Permeability* k;
    double mu;
    std::array<double, 2> grad_mu;
    std::array<double, 2> grad_p;
};

/// Visits every quadrature point with the reconstruction of (mu, p).
template <class Visit>
void for_each_point(const ProblemData& data, const FieldCoefficients& mu, const FieldCoefficients& p,
                    Visit&& visit)
{
    const Mesh& mesh = data.mesh;
    const int nn = mesh.nodes_per_cell();
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const auto cn = mesh.cell_nodes(c);
        for (int q = 0; q < mesh.points_per_cell(); ++q) {
            const auto& e = mesh.quadrature().points[static_cast<std::size_t>(q)];
            PointValues v{e.weight,
                          mesh.quadrature_point(c, q),
                          data.porosity[static_cast<std::size_t>(c)],
                          &data.permeability[static_cast<std::size_t>(c)],
                          0.0,
                          {0.0, 0.0},
                          {0.0, 0.0}};
            for (int a = 0; a < nn; ++a) {
                v.mu += e.shape[a] * mu[cn[a]];
                for (int d = 0; d < 2; ++d) {
                    v.grad_mu[d] += e.grad[a][d] * mu[cn[a]];
                    v.grad_p[d] += e.grad[a][d] * p[cn[a]];
                }
            }
            visit(c, q, v);
        }
    }
}

double kdot(const Permeability& k, const std::array<double, 2>& a, const std::array<double, 2>& b)
{
    return a[0] * (k.xx * b[0] + k.xy * b[1]) + a[1] * (k.xy * b[0] + k.yy * b[1]);
}

} // namespace

double energy(const State& state, const ProblemData& data)
{
    double e = 0.0;
    for_each_point(data, state.mu, state.p, [&](int, int, const PointValues& v) {
        e += v.weight * v.phi * data.model.free_energy(data.model.invert_mu(v.mu));
    });
    return e;
}

double mass(const State& state, const ProblemData& data)
{
    double m = 0.0;
    for_each_point(data, state.mu, state.p, [&](int, int, const PointValues& v) {
        m += v.weight * v.phi * data.model.invert_mu(v.mu);
    });
    return m;
}

double mu_gradient_max(const State& state, const ProblemData& data)
{
    double g = 0.0;
    for_each_point(data, state.mu, state.p, [&](int, int, const PointValues& v) {
        g = std::max(g, std::hypot(v.grad_mu[0], v.grad_mu[1]));
    });
    return g;
}

SparseMatrix mobility_stiffness(const State& state, const ProblemData& data, Phase phase)
{
    const Mesh& mesh = data.mesh;
    const int nn = mesh.nodes_per_cell();
    std::vector<Eigen::Triplet<double>> triplets;
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const auto cn = mesh.cell_nodes(c);
        const Permeability& k = data.permeability[static_cast<std::size_t>(c)];
        for (const auto& e : mesh.quadrature().points) {
            double mu_q = 0.0;
            for (int a = 0; a < nn; ++a)
                mu_q += e.shape[a] * state.mu[cn[a]];
            const double lam = data.model.mobility(data.model.invert_mu(mu_q), phase);
            for (int a = 0; a < nn; ++a)
                for (int b = 0; b < nn; ++b)
                    triplets.emplace_back(cn[a], cn[b], e.weight * lam * kdot(k, e.grad[b], e.grad[a]));
        }
    }
    SparseMatrix a(mesh.node_count(), mesh.node_count());
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

StepReport step_report(const State& old_state, const State& new_state, double tau,
                       const ProblemData& data, const SolveStats& stats)
{
    const auto& model = data.model;
    const Mesh& mesh = data.mesh;
    StepReport rep;
    rep.t_new = new_state.t;
    rep.tau = tau;
    rep.solver = stats;
    rep.closed = data.is_closed();

    // Boundary extensions: Dirichlet values at gamma1 nodes, zero elsewhere,
    // so that mu - ext1 and p - ext3 are admissible test functions.
    FieldCoefficients ext1 = FieldCoefficients::Zero(mesh.node_count());
    FieldCoefficients ext3 = FieldCoefficients::Zero(mesh.node_count());
    if (mesh.has_dirichlet()) {
        const double t_lift = new_state.t - 0.5 * tau;
        for (int i = 0; i < mesh.node_count(); ++i) {
            if (!mesh.is_dirichlet(i))
                continue;
            ext1[i] = data.mu_dirichlet(mesh.node(i), t_lift);
            ext3[i] = data.p_dirichlet(mesh.node(i), t_lift);
        }
    }
    const QuadratureField ext1_q = mesh.at_quadrature(ext1);
    const QuadratureField ext3_q = mesh.at_quadrature(ext3);
    const QuadratureField old_mu_q = mesh.at_quadrature(old_state.mu);
    const QuadratureField p_q = mesh.at_quadrature(new_state.p);
    const int nq = mesh.points_per_cell();
    const int nn = mesh.nodes_per_cell();

    double dS2 = 0.0;
    double rhs = 0.0;
    for_each_point(data, new_state.mu, new_state.p, [&](int c, int q, const PointValues& v) {
        const auto k = static_cast<std::size_t>(c * nq + q);
        const double s_new = model.invert_mu(v.mu);
        const double s_old = model.invert_mu(old_mu_q[k]);
        const double ds = s_new - s_old;
        const double lw = model.mobility(s_new, Phase::wetting);
        const double ln = model.mobility(s_new, Phase::nonwetting);
        const std::array<double, 2> g_sum{v.grad_mu[0] + v.grad_p[0], v.grad_mu[1] + v.grad_p[1]};

        rep.energy_new += v.weight * v.phi * model.free_energy(s_new);
        rep.energy_old += v.weight * v.phi * model.free_energy(s_old);
        rep.mass += v.weight * v.phi * s_new;
        dS2 += v.weight * ds * ds;
        rep.convexity_sum_pointwise += v.weight * v.phi * 0.5 * model.c_min() * ds * ds;
        rep.diss_n += tau * v.weight * ln * kdot(*v.k, v.grad_p, v.grad_p);
        rep.diss_w += tau * v.weight * lw * kdot(*v.k, g_sum, g_sum);
        rep.mu_grad_max = std::max(rep.mu_grad_max, std::hypot(v.grad_mu[0], v.grad_mu[1]));

        if (rep.closed)
            return;
        // Work terms of the energy estimate for driven systems.
        const auto& e = mesh.quadrature().points[static_cast<std::size_t>(q)];
        const auto cn = mesh.cell_nodes(c);
        std::array<double, 2> g1{0.0, 0.0};
        std::array<double, 2> g3{0.0, 0.0};
        for (int a = 0; a < nn; ++a)
            for (int d = 0; d < 2; ++d) {
                g1[d] += e.grad[a][d] * ext1[cn[a]];
                g3[d] += e.grad[a][d] * ext3[cn[a]];
            }
        const std::array<double, 2> g13{g1[0] + g3[0], g1[1] + g3[1]};
        const double sc = model.clamp(s_new);
        const double qw = data.q_w.value(v.x, new_state.t, sc);
        const double qn = data.q_n.value(v.x, new_state.t, sc);
        const double p_here = p_q[k];
        rhs += v.weight * v.phi * ds * ext1_q[k];
        rhs += tau * v.weight * (lw * kdot(*v.k, g_sum, g13) + ln * kdot(*v.k, v.grad_p, g3));
        rhs += tau * v.weight *
               (qn * (p_here - ext3_q[k]) + qw * (v.mu + p_here - ext1_q[k] - ext3_q[k]));
    });

    if (!rep.closed && (!data.flux_n.is_zero() || !data.flux_w.is_zero())) {
        for (const auto& f : mesh.boundary_faces()) {
            if (f.tag != BoundaryTag::gamma2)
                continue;
            for (const auto& pt : f.points) {
                double mu_b = 0.0;
                double p_b = 0.0;
                double e1 = 0.0;
                double e3 = 0.0;
                for (int k = 0; k < f.node_count; ++k) {
                    mu_b += pt.shape[k] * new_state.mu[f.nodes[k]];
                    p_b += pt.shape[k] * new_state.p[f.nodes[k]];
                    e1 += pt.shape[k] * ext1[f.nodes[k]];
                    e3 += pt.shape[k] * ext3[f.nodes[k]];
                }
                const double sc = model.clamp(model.invert_mu(mu_b));
                const double phi2 = data.flux_n.value(pt.position, new_state.t, sc);
                const double phi4 = data.flux_w.value(pt.position, new_state.t, sc);
                rhs += tau * pt.weight * (phi2 * (p_b - e3) + phi4 * (mu_b + p_b - e1 - e3));
            }
        }
    }

    rep.convexity_sum = 0.5 * model.params().phi_m * model.c_min() * dS2;
    rep.energy_rhs = rhs;
    rep.energy_lhs =
        rep.energy_new - rep.energy_old + rep.convexity_sum + rep.diss_n + rep.diss_w;
    rep.energy_tol = 1e-9 * std::max(1.0, std::abs(rep.energy_old));
    if (rep.closed)
        rep.energy_inequality_ok = rep.energy_lhs <= rep.energy_tol;

    rep.s_min = new_state.s.minCoeff();
    rep.s_max = new_state.s.maxCoeff();
    return rep;
}

PressureTransforms pressure_transforms(const State& state, const ProblemData& data)
{
    const auto& model = data.model;
    PressureTransforms out;
    out.psi.resize(state.s.size());
    out.theta.resize(state.s.size());
    for (Eigen::Index i = 0; i < state.s.size(); ++i) {
        const double s = state.s[i];
        const double mu_back = model.chemical_potential(s);
        if (std::abs(mu_back - state.mu[i]) > 1e-10 * std::max(1.0, std::abs(state.mu[i]))) {
            std::ostringstream os;
            os << "node " << i << ": chemical_potential(S) = " << mu_back
               << " does not match mu = " << state.mu[i];
            throw InvariantViolation(os.str());
        }
        out.psi[i] = state.p[i] + model.artificial_pressure_shift(s);
        out.theta[i] = model.complementary_pressure(s);
    }
    return out;
}

} // namespace porflow
