#include "porflow/mms.hpp"

#include <cmath>
#include <numbers>

#include "porflow/errors.hpp"

namespace porflow {

ManufacturedSolution cosine_manufactured(double s_mean, double s_amp, double p_amp, double decay,
                                         double length)
{
    const double k = std::numbers::pi / length;
    ManufacturedSolution m;
    m.length = length;
    auto e = [decay](double t) { return std::exp(-decay * t); };
    m.s = [=](double x, double t) { return s_mean + s_amp * std::cos(k * x) * e(t); };
    m.s_t = [=](double x, double t) { return -decay * s_amp * std::cos(k * x) * e(t); };
    m.s_x = [=](double x, double t) { return -k * s_amp * std::sin(k * x) * e(t); };
    m.s_xx = [=](double x, double t) { return -k * k * s_amp * std::cos(k * x) * e(t); };
    m.p = [=](double x, double t) { return p_amp * std::cos(k * x) * e(t); };
    m.p_x = [=](double x, double t) { return -k * p_amp * std::sin(k * x) * e(t); };
    m.p_xx = [=](double x, double t) { return -k * k * p_amp * std::cos(k * x) * e(t); };
    return m;
}

ManufacturedSolution constant_manufactured(double s, double p, double length)
{
    ManufacturedSolution m;
    m.length = length;
    auto zero = [](double, double) { return 0.0; };
    m.s = [s](double, double) { return s; };
    m.p = [p](double, double) { return p; };
    m.s_t = m.s_x = m.s_xx = zero;
    m.p_x = m.p_xx = zero;
    return m;
}

ProblemData manufactured_problem(const ManufacturedSolution& exact, const MaterialParams& params,
                                 RelPermKind kind, int cells)
{
    ConstitutiveModel model(params, kind);
    ProblemData data(build_mesh(MeshSpec::closed(1, {exact.length, 1.0}, {cells, 1})), model);

    // Strong-form residuals with the manufactured fields substituted:
    //   q_w = phi S_t - d/dx(lambda_w K (mu_x + p_x))
    //   q_t = -d/dx(lambda_t K p_x) - d/dx(lambda_w K mu_x)
    auto terms = [exact, model](double x, double t, double& qw, double& qt) {
        const double s = exact.s(x, t);
        const double sx = exact.s_x(x, t);
        const double dmu = model.dmu_dS(s);
        const double mux = dmu * sx;
        const double muxx = model.d2mu_dS2(s) * sx * sx + dmu * exact.s_xx(x, t);
        const double px = exact.p_x(x, t);
        const double pxx = exact.p_xx(x, t);
        const double lw = model.mobility(s, Phase::wetting);
        const double ln = model.mobility(s, Phase::nonwetting);
        const double dlw = model.dmobility_dS(s, Phase::wetting);
        const double dln = model.dmobility_dS(s, Phase::nonwetting);
        const double g = mux + px;
        const double gx = muxx + pxx;
        qw = exact.s_t(x, t) - (dlw * sx * g + lw * gx);
        qt = -((dlw + dln) * sx * px + (lw + ln) * pxx) - (dlw * sx * mux + lw * muxx);
    };
    data.q_w = SaturationFunction::general([terms](const Point& x, double t, double) {
        double qw = 0.0;
        double qt = 0.0;
        terms(x.x, t, qw, qt);
        return qw;
    });
    data.q_n = SaturationFunction::general([terms](const Point& x, double t, double) {
        double qw = 0.0;
        double qt = 0.0;
        terms(x.x, t, qw, qt);
        return qt - qw;
    });
    data.initial_mu = [exact, model](const Point& x, double) {
        return model.chemical_potential(exact.s(x.x, 0.0));
    };
    return data;
}

FieldErrors l2_errors(const State& state, const ProblemData& data, const ManufacturedSolution& exact)
{
    const Mesh& mesh = data.mesh;
    if (mesh.dim() != 1)
        throw ValidationError("l2_errors: manufactured solutions are one-dimensional");
    const double h = mesh.cell_size()[0];
    const double r = std::sqrt(0.6);
    const double pts[3] = {0.5 * (1.0 - r), 0.5, 0.5 * (1.0 + r)};
    const double wts[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double es = 0.0;
    double ep = 0.0;
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const double x0 = mesh.node(c).x;
        for (int q = 0; q < 3; ++q) {
            const double xi = pts[q];
            const double x = x0 + xi * h;
            const double mu = (1.0 - xi) * state.mu[c] + xi * state.mu[c + 1];
            const double p = (1.0 - xi) * state.p[c] + xi * state.p[c + 1];
            const double ds = data.model.invert_mu(mu) - exact.s(x, state.t);
            const double dp = p - exact.p(x, state.t);
            es += wts[q] * h * ds * ds;
            ep += wts[q] * h * dp * dp;
        }
    }
    return {std::sqrt(es), std::sqrt(ep)};
}

double observed_order(const std::vector<double>& sizes, const std::vector<double>& errors)
{
    if (sizes.size() != errors.size() || sizes.size() < 2)
        throw ValidationError("observed_order needs at least two (size, error) pairs");
    const auto n = static_cast<double>(sizes.size());
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const double x = std::log(sizes[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

ConvergenceSample run_sample(const ManufacturedSolution& exact, const MaterialParams& params,
                             RelPermKind kind, int cells, double tau, double final_time,
                             const NewtonConfig& cfg)
{
    const ProblemData data = manufactured_problem(exact, params, kind, cells);
    RunOptions opts;
    opts.newton = cfg;
    opts.keep_states = false;
    const Trajectory traj = run(data, tau, final_time, opts);
    ConvergenceSample sample;
    sample.cells = cells;
    sample.h = exact.length / cells;
    sample.tau = tau;
    sample.steps = static_cast<int>(traj.reports.size());
    sample.error = l2_errors(traj.states.back(), data, exact);
    return sample;
}

ConvergenceStudy finish(std::vector<ConvergenceSample> samples, bool by_h)
{
    ConvergenceStudy study;
    study.samples = std::move(samples);
    std::vector<double> sizes;
    std::vector<double> errors;
    for (const auto& s : study.samples) {
        sizes.push_back(by_h ? s.h : s.tau);
        errors.push_back(s.error.s);
    }
    study.observed_order = observed_order(sizes, errors);
    return study;
}

} // namespace

ConvergenceStudy spatial_convergence(const ManufacturedSolution& exact, const MaterialParams& params,
                                     RelPermKind kind, const std::vector<int>& cells, double tau_ref,
                                     double final_time, const NewtonConfig& cfg)
{
    if (cells.empty())
        throw ValidationError("spatial_convergence: empty mesh family");
    const double h_ref = exact.length / cells.front();
    std::vector<ConvergenceSample> samples;
    for (int n : cells) {
        const double h = exact.length / n;
        samples.push_back(run_sample(exact, params, kind, n, tau_ref * (h / h_ref) * (h / h_ref),
                                     final_time, cfg));
    }
    return finish(std::move(samples), true);
}

ConvergenceStudy temporal_convergence(const ManufacturedSolution& exact, const MaterialParams& params,
                                      RelPermKind kind, int cells, const std::vector<double>& taus,
                                      double final_time, const NewtonConfig& cfg)
{
    std::vector<ConvergenceSample> samples;
    for (double tau : taus)
        samples.push_back(run_sample(exact, params, kind, cells, tau, final_time, cfg));
    return finish(std::move(samples), false);
}

MmsReport mms_convergence(const ManufacturedSolution& exact, const MaterialParams& params,
                          RelPermKind kind, const NewtonConfig& cfg)
{
    MmsReport report;
    report.spatial = spatial_convergence(exact, params, kind, {16, 32, 64, 128}, 0.1 / 8.0, 0.1, cfg);
    report.temporal = temporal_convergence(exact, params, kind, 256, {0.1, 0.05, 0.025}, 1.0, cfg);
    return report;
}

} // namespace porflow
