#include "porflow/assembly.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "porflow/errors.hpp"

namespace porflow {

// ---------------------------------------------------------------------------
// SaturationFunction

SaturationFunction SaturationFunction::constant(double c)
{
    SaturationFunction f;
    if (c != 0.0)
        f.value_ = [c](const Point&, double, double) { return c; };
    return f;
}

SaturationFunction SaturationFunction::of_saturation(std::function<double(double)> f,
                                                     std::function<double(double)> df)
{
    SaturationFunction out;
    out.value_ = [f = std::move(f)](const Point&, double, double s) { return f(s); };
    if (df)
        out.derivative_ = [df = std::move(df)](const Point&, double, double s) { return df(s); };
    return out;
}

SaturationFunction SaturationFunction::general(Fn f, Fn df)
{
    SaturationFunction out;
    out.value_ = std::move(f);
    out.derivative_ = std::move(df);
    return out;
}

// ---------------------------------------------------------------------------
// ProblemData

ProblemData::ProblemData(Mesh mesh_in, ConstitutiveModel model_in)
    : mesh(std::move(mesh_in)),
      model(std::move(model_in)),
      porosity(static_cast<std::size_t>(mesh.cell_count()), 1.0),
      permeability(static_cast<std::size_t>(mesh.cell_count())),
      initial_mu([](const Point&, double) { return 0.0; })
{}

bool ProblemData::is_closed() const
{
    return q_w.is_zero() && q_n.is_zero() && flux_n.is_zero() && flux_w.is_zero() &&
           !mesh.has_dirichlet();
}

std::pair<double, double> ProblemData::permeability_bounds() const
{
    double kmin = std::numeric_limits<double>::infinity();
    double kmax = -kmin;
    for (const auto& k : permeability) {
        if (mesh.dim() == 1) {
            kmin = std::min(kmin, k.xx);
            kmax = std::max(kmax, k.xx);
            continue;
        }
        const double mean = 0.5 * (k.xx + k.yy);
        const double rad = std::sqrt(0.25 * (k.xx - k.yy) * (k.xx - k.yy) + k.xy * k.xy);
        kmin = std::min(kmin, mean - rad);
        kmax = std::max(kmax, mean + rad);
    }
    return {kmin, kmax};
}

void ProblemData::validate() const
{
    const auto cells = static_cast<std::size_t>(mesh.cell_count());
    if (porosity.size() != cells || permeability.size() != cells)
        throw ValidationError("porosity/permeability must have one entry per cell");
    for (double phi : porosity)
        if (!(phi >= model.params().phi_m && phi <= 1.0))
            throw ValidationError("Assumption 1: porosity must lie in [phi_m, 1]");
    if (!(permeability_bounds().first > 0.0))
        throw ValidationError("permeability must be symmetric positive definite (K_min > 0)");
    if (mesh.has_dirichlet() && (!mu_dirichlet || !p_dirichlet))
        throw ValidationError("gamma1 boundary requires both mu and p Dirichlet data");
    if (!initial_mu)
        throw ValidationError("initial potential is not set");
}

// ---------------------------------------------------------------------------
// StepResidual

double StepResidual::norm() const
{
    return stacked().norm();
}

Eigen::VectorXd StepResidual::stacked() const
{
    Eigen::VectorXd out(r_mu.size() + r_p.size() + (r_mean ? 1 : 0));
    out << r_mu, r_p;
    if (r_mean)
        out[out.size() - 1] = *r_mean;
    return out;
}

// ---------------------------------------------------------------------------
// StepProblem

namespace {

double dot_k(const Permeability& k, const std::array<double, 2>& a, const std::array<double, 2>& b)
{
    return a[0] * (k.xx * b[0] + k.xy * b[1]) + a[1] * (k.xy * b[0] + k.yy * b[1]);
}

} // namespace

StepProblem::StepProblem(const ProblemData& data, QuadratureField s_old, double tau, double t_new)
    : StepProblem(data, std::move(s_old), tau, t_new, t_new - 0.5 * tau)
{}

StepProblem::StepProblem(const ProblemData& data, QuadratureField s_old, double tau, double t_new,
                         double lift_time)
    : data_(&data), s_old_(std::move(s_old)), tau_(tau), t_new_(t_new)
{
    const Mesh& mesh = data.mesh;
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("time step must be positive");
    if (s_old_.size() != static_cast<std::size_t>(mesh.cell_count() * mesh.points_per_cell()))
        throw ValidationError("previous saturation has wrong quadrature length");

    free_index_.assign(static_cast<std::size_t>(mesh.node_count()), -1);
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (mesh.is_dirichlet(i))
            continue;
        free_index_[static_cast<std::size_t>(i)] = free_count_++;
        free_nodes_.push_back(i);
    }

    // Boundary data averaged over the step, approximated at the midpoint.
    const double t_lift = lift_time;
    mu_lift_ = FieldCoefficients::Zero(mesh.node_count());
    p_lift_ = FieldCoefficients::Zero(mesh.node_count());
    if (mesh.has_dirichlet()) {
        if (!data.mu_dirichlet || !data.p_dirichlet)
            throw ValidationError("gamma1 boundary requires both mu and p Dirichlet data");
        for (int i = 0; i < mesh.node_count(); ++i) {
            if (!mesh.is_dirichlet(i))
                continue;
            mu_lift_[i] = data.mu_dirichlet(mesh.node(i), t_lift);
            p_lift_[i] = data.p_dirichlet(mesh.node(i), t_lift);
        }
    }

    mean_weights_.assign(static_cast<std::size_t>(mesh.node_count()), 0.0);
    const double inv_measure = 1.0 / mesh.measure();
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const auto cn = mesh.cell_nodes(c);
        for (const auto& e : mesh.quadrature().points)
            for (int a = 0; a < mesh.nodes_per_cell(); ++a)
                mean_weights_[static_cast<std::size_t>(cn[a])] += e.weight * e.shape[a] * inv_measure;
    }
}

Eigen::VectorXd StepProblem::pack(const FieldCoefficients& mu, const FieldCoefficients& p,
                                  double multiplier) const
{
    Eigen::VectorXd x(size());
    for (int k = 0; k < free_count_; ++k) {
        x[k] = mu[free_nodes_[static_cast<std::size_t>(k)]];
        x[free_count_ + k] = p[free_nodes_[static_cast<std::size_t>(k)]];
    }
    if (has_multiplier())
        x[size() - 1] = multiplier;
    return x;
}

void StepProblem::unpack(const Eigen::VectorXd& x, FieldCoefficients& mu, FieldCoefficients& p) const
{
    mu = mu_lift_;
    p = p_lift_;
    for (int k = 0; k < free_count_; ++k) {
        mu[free_nodes_[static_cast<std::size_t>(k)]] = x[k];
        p[free_nodes_[static_cast<std::size_t>(k)]] = x[free_count_ + k];
    }
}

StepResidual StepProblem::split(const Eigen::VectorXd& r) const
{
    StepResidual out;
    out.r_mu = r.head(free_count_);
    out.r_p = r.segment(free_count_, free_count_);
    if (has_multiplier())
        out.r_mean = r[size() - 1];
    return out;
}

Eigen::VectorXd StepProblem::residual(const Eigen::VectorXd& x) const
{
    Eigen::VectorXd r;
    evaluate(x, &r, nullptr, {});
    return r;
}

SparseMatrix StepProblem::jacobian(const Eigen::VectorXd& x, const JacobianOptions& opts) const
{
    std::vector<Eigen::Triplet<double>> triplets;
    evaluate(x, nullptr, &triplets, opts);
    SparseMatrix j(size(), size());
    j.setFromTriplets(triplets.begin(), triplets.end());
    return j;
}

void StepProblem::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* r,
                           std::vector<Eigen::Triplet<double>>* jac,
                           const JacobianOptions& opts) const
{
    const ProblemData& data = *data_;
    const Mesh& mesh = data.mesh;
    const ConstitutiveModel& model = data.model;
    const double s_lo = model.s_eps();
    const double s_hi = 1.0 - model.s_eps();
    const int nn = mesh.nodes_per_cell();
    const int nq = mesh.points_per_cell();
    const int nf = free_count_;
    const int mult_index = has_multiplier() ? size() - 1 : -1;

    if (x.size() != size())
        throw ValidationError("StepProblem: unknown vector has wrong length");
    FieldCoefficients mu;
    FieldCoefficients p;
    unpack(x, mu, p);

    if (r)
        r->setZero(size());
    if (jac)
        jac->reserve(static_cast<std::size_t>(mesh.cell_count() * nq * nn * nn * 4));

    auto add_jac = [&](int row, int col, double v) {
        if (row >= 0 && col >= 0)
            jac->emplace_back(row, col, v);
    };

    for (int c = 0; c < mesh.cell_count(); ++c) {
        const auto cn = mesh.cell_nodes(c);
        const double phi = data.porosity[static_cast<std::size_t>(c)];
        const Permeability& kc = data.permeability[static_cast<std::size_t>(c)];
        std::array<int, 4> fi{-1, -1, -1, -1};
        for (int a = 0; a < nn; ++a)
            fi[a] = free_index_[static_cast<std::size_t>(cn[a])];

        for (int q = 0; q < nq; ++q) {
            const auto& e = mesh.quadrature().points[static_cast<std::size_t>(q)];
            const Point xq = mesh.quadrature_point(c, q);
            double mu_q = 0.0;
            std::array<double, 2> gmu{0.0, 0.0};
            std::array<double, 2> gp{0.0, 0.0};
            for (int a = 0; a < nn; ++a) {
                const double mv = mu[cn[a]];
                const double pv = p[cn[a]];
                mu_q += e.shape[a] * mv;
                for (int d = 0; d < 2; ++d) {
                    gmu[d] += e.grad[a][d] * mv;
                    gp[d] += e.grad[a][d] * pv;
                }
            }
            const double s = model.invert_mu(mu_q);
            const double sc = model.clamp(s);
            const bool inside = s >= s_lo && s <= s_hi;
            const double lw = model.mobility(s, Phase::wetting);
            const double ln = model.mobility(s, Phase::nonwetting);
            const double lt = lw + ln;
            const double qw = data.q_w.value(xq, t_new_, sc);
            const double qn = data.q_n.value(xq, t_new_, sc);
            const double storage = phi * (s - s_old_[static_cast<std::size_t>(c * nq + q)]) / tau_;
            const std::array<double, 2> gsum{gmu[0] + gp[0], gmu[1] + gp[1]};
            const double w = e.weight;

            if (r) {
                for (int a = 0; a < nn; ++a) {
                    const double na = e.shape[a];
                    if (fi[a] < 0)
                        continue;
                    (*r)[fi[a]] +=
                        w * (storage * na + lw * dot_k(kc, gsum, e.grad[a]) - qw * na);
                    (*r)[nf + fi[a]] += w * (lt * dot_k(kc, gp, e.grad[a]) +
                                             lw * dot_k(kc, gmu, e.grad[a]) - (qw + qn) * na);
                }
            }
            if (!jac)
                continue;

            // d/dmu_b of quantities at the point: S' = 1/(dmu/dS), times N_b.
            const double sprime = 1.0 / model.dmu_dS(s);
            const double dlw = opts.freeze_mobility ? 0.0 : model.dmobility_dS(s, Phase::wetting) * sprime;
            const double dln =
                opts.freeze_mobility ? 0.0 : model.dmobility_dS(s, Phase::nonwetting) * sprime;
            const double dqw = inside ? data.q_w.derivative(xq, t_new_, sc) * sprime : 0.0;
            const double dqn = inside ? data.q_n.derivative(xq, t_new_, sc) * sprime : 0.0;

            for (int a = 0; a < nn; ++a) {
                if (fi[a] < 0)
                    continue;
                const double na = e.shape[a];
                const int row_mu = fi[a];
                const int row_p = nf + fi[a];
                const double flux_sum = dot_k(kc, gsum, e.grad[a]);
                const double flux_p = dot_k(kc, gp, e.grad[a]);
                const double flux_mu = dot_k(kc, gmu, e.grad[a]);
                for (int b = 0; b < nn; ++b) {
                    if (fi[b] < 0)
                        continue;
                    const double nb = e.shape[b];
                    const double stiff = dot_k(kc, e.grad[b], e.grad[a]);
                    const int col_mu = fi[b];
                    const int col_p = nf + fi[b];
                    add_jac(row_mu, col_mu,
                            w * (phi * sprime * nb * na / tau_ + lw * stiff + dlw * nb * flux_sum -
                                 dqw * nb * na));
                    add_jac(row_mu, col_p, w * lw * stiff);
                    add_jac(row_p, col_mu,
                            w * ((dlw + dln) * nb * flux_p + lw * stiff + dlw * nb * flux_mu -
                                 (dqw + dqn) * nb * na));
                    add_jac(row_p, col_p, w * lt * stiff);
                }
            }
        }
    }

    // Neumann data on gamma2, evaluated at the trace of S(mu_new).
    if (!data.flux_n.is_zero() || !data.flux_w.is_zero()) {
        for (const auto& f : mesh.boundary_faces()) {
            if (f.tag != BoundaryTag::gamma2)
                continue;
            for (const auto& pt : f.points) {
                double mu_b = 0.0;
                for (int k = 0; k < f.node_count; ++k)
                    mu_b += pt.shape[k] * mu[f.nodes[k]];
                const double s = model.invert_mu(mu_b);
                const double sc = model.clamp(s);
                const double phi4 = data.flux_w.value(pt.position, t_new_, sc);
                const double phi2 = data.flux_n.value(pt.position, t_new_, sc);
                if (r) {
                    for (int k = 0; k < f.node_count; ++k) {
                        const int fk = free_index_[static_cast<std::size_t>(f.nodes[k])];
                        if (fk < 0)
                            continue;
                        (*r)[fk] -= pt.weight * phi4 * pt.shape[k];
                        (*r)[nf + fk] -= pt.weight * (phi2 + phi4) * pt.shape[k];
                    }
                }
                if (!jac || s < s_lo || s > s_hi)
                    continue;
                const double sprime = 1.0 / model.dmu_dS(s);
                const double d4 = data.flux_w.derivative(pt.position, t_new_, sc) * sprime;
                const double d2 = data.flux_n.derivative(pt.position, t_new_, sc) * sprime;
                for (int k = 0; k < f.node_count; ++k) {
                    const int fk = free_index_[static_cast<std::size_t>(f.nodes[k])];
                    if (fk < 0)
                        continue;
                    for (int j = 0; j < f.node_count; ++j) {
                        const int fj = free_index_[static_cast<std::size_t>(f.nodes[j])];
                        if (fj < 0)
                            continue;
                        const double nn_kj = pt.weight * pt.shape[k] * pt.shape[j];
                        add_jac(fk, fj, -d4 * nn_kj);
                        add_jac(nf + fk, fj, -(d2 + d4) * nn_kj);
                    }
                }
            }
        }
    }

    if (mult_index >= 0) {
        const double ell = x[mult_index];
        double mean = 0.0;
        for (int k = 0; k < nf; ++k) {
            const double cw = mean_weights_[static_cast<std::size_t>(free_nodes_[static_cast<std::size_t>(k)])];
            mean += cw * x[nf + k];
            if (r)
                (*r)[nf + k] += ell * cw;
            if (jac) {
                jac->emplace_back(nf + k, mult_index, cw);
                jac->emplace_back(mult_index, nf + k, cw);
            }
        }
        if (r)
            (*r)[mult_index] = mean;
    }
}

// ---------------------------------------------------------------------------

QuadratureField quadrature_saturation(const ProblemData& data, const FieldCoefficients& mu)
{
    QuadratureField s = data.mesh.at_quadrature(mu);
    for (double& v : s)
        v = data.model.invert_mu(v);
    return s;
}

StepResidual assemble_residual(const FieldCoefficients& mu_new, const FieldCoefficients& p_new,
                               const QuadratureField& s_old, double tau, const ProblemData& data,
                               double t_new)
{
    StepProblem problem(data, s_old, tau, t_new);
    return problem.split(problem.residual(problem.pack(mu_new, p_new)));
}

SparseMatrix assemble_jacobian(const FieldCoefficients& mu_new, const FieldCoefficients& p_new,
                               const QuadratureField& s_old, double tau, const ProblemData& data,
                               double t_new, const JacobianOptions& opts)
{
    StepProblem problem(data, s_old, tau, t_new);
    return problem.jacobian(problem.pack(mu_new, p_new), opts);
}

Assumption4Report check_assumption4(const ProblemData& data, std::span<const double> times)
{
    Assumption4Report report;
    const auto& model = data.model;
    const Mesh& mesh = data.mesh;
    const double lo = model.s_eps();
    const double hi = 1.0 - lo;
    const double lw_lo = model.mobility(lo, Phase::wetting);
    const double ln_lo = model.mobility(lo, Phase::nonwetting);
    const double lw_hi = model.mobility(hi, Phase::wetting);
    const double ln_hi = model.mobility(hi, Phase::nonwetting);

    auto fail = [&](const std::string& what, const Point& x, double t, double value) {
        report.pass = false;
        std::ostringstream os;
        os << what << " at (" << x.x << ", " << x.y << "), t = " << t << ": value " << value;
        report.violations.push_back(os.str());
    };

    std::vector<double> sample_times(times.begin(), times.end());
    if (sample_times.empty())
        sample_times.push_back(0.0);

    std::vector<char> on_gamma2(static_cast<std::size_t>(mesh.node_count()), 0);
    for (const auto& f : mesh.boundary_faces())
        if (f.tag == BoundaryTag::gamma2)
            for (int k = 0; k < f.node_count; ++k)
                on_gamma2[static_cast<std::size_t>(f.nodes[k])] = 1;

    for (double t : sample_times) {
        for (int i = 0; i < mesh.node_count(); ++i) {
            const Point& x = mesh.node(i);
            if (!data.q_w.is_zero() || !data.q_n.is_zero()) {
                const double c1 = ln_lo * data.q_w.value(x, t, lo) - lw_lo * data.q_n.value(x, t, lo);
                const double c3 = ln_hi * data.q_w.value(x, t, hi) - lw_hi * data.q_n.value(x, t, hi);
                if (c1 < 0.0)
                    fail("Assumption 4 (4.1): lambda_n q_w - lambda_w q_n < 0 at s_eps", x, t, c1);
                if (c3 > 0.0)
                    fail("Assumption 4 (4.3): lambda_n q_w - lambda_w q_n > 0 at 1-s_eps", x, t, c3);
            }
            if (on_gamma2[static_cast<std::size_t>(i)] &&
                (!data.flux_n.is_zero() || !data.flux_w.is_zero())) {
                const double c2 =
                    ln_lo * data.flux_w.value(x, t, lo) - lw_lo * data.flux_n.value(x, t, lo);
                const double c4 =
                    ln_hi * data.flux_w.value(x, t, hi) - lw_hi * data.flux_n.value(x, t, hi);
                if (c2 < 0.0)
                    fail("Assumption 4 (4.2): lambda_n phi_4 - lambda_w phi_2 < 0 at s_eps", x, t, c2);
                if (c4 > 0.0)
                    fail("Assumption 4 (4.4): lambda_n phi_4 - lambda_w phi_2 > 0 at 1-s_eps", x, t, c4);
            }
            if (mesh.is_dirichlet(i) && data.mu_dirichlet) {
                const double phi1 = data.mu_dirichlet(x, t);
                if (phi1 < model.chemical_potential(lo) || phi1 > model.chemical_potential(hi))
                    fail("Assumption 4: phi_1 outside [mu_w(s_eps), mu_w(1-s_eps)]", x, t, phi1);
            }
        }
    }
    return report;
}

void write_triplets(std::ostream& os, const SparseMatrix& a)
{
    os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n' << std::setprecision(17);
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

} // namespace porflow
