#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "porflow/assembly.hpp"
#include "porflow/config.hpp"
#include "porflow/simulation.hpp"

namespace porflow::fixtures {

inline ProblemData closed_cosine_1d(int cells, double mean = 0.5, double amp = 0.3,
                                    MaterialParams params = {})
{
    ConstitutiveModel model(params);
    ProblemData data(build_mesh(MeshSpec::closed(1, {1.0, 1.0}, {cells, 1})), model);
    data.initial_mu = [model, mean, amp](const Point& x, double) {
        return model.chemical_potential(mean + amp * std::cos(std::numbers::pi * x.x));
    };
    return data;
}

inline RunConfig preset(const char* name)
{
    return preset_config(name);
}

/// Independent reimplementations from the model definitions, used as oracles.
namespace oracle {

inline double mu(const MaterialParams& m, double s)
{
    return m.gamma_w * std::log(s) - m.gamma_n * std::log(1.0 - s) + m.gamma_wn * (1.0 - 2.0 * s);
}

/// Plain bisection for mu(S) = target on (0, 1).
inline double saturation(const MaterialParams& m, double target)
{
    double lo = 1e-300;
    double hi = 1.0 - 1e-16;
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (mu(m, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Quadratic relative permeabilities over viscosity at the clamped saturation.
inline double lambda_w(const MaterialParams& m, double s)
{
    const double c = std::clamp(s, m.s_eps, 1.0 - m.s_eps);
    return c * c / m.eta_w;
}

inline double lambda_n(const MaterialParams& m, double s)
{
    const double c = std::clamp(s, m.s_eps, 1.0 - m.s_eps);
    return (1.0 - c) * (1.0 - c) / m.eta_n;
}

/**
 * Dense residual of one implicit step for a closed 1D problem on [0, L]
 * with uniform cells, unit porosity and permeability, constant sources:
 * unknowns [mu_0..mu_n, p_0..p_n, ell], two Gauss points per cell.
 */
struct Closed1d
{
    MaterialParams m;
    int cells = 2;
    double length = 1.0;
    double tau = 0.1;
    double q_w = 0.0;
    double q_n = 0.0;
    std::vector<double> s_old;  ///< per Gauss point, cell-major

    int nodes() const { return cells + 1; }
    int size() const { return 2 * nodes() + 1; }

    static std::array<double, 2> gauss()
    {
        const double r = 0.5 / std::sqrt(3.0);
        return {0.5 - r, 0.5 + r};
    }

    std::vector<double> at_gauss_saturation(const Eigen::VectorXd& mu_nodes) const
    {
        std::vector<double> s;
        for (int c = 0; c < cells; ++c)
            for (double g : gauss())
                s.push_back(saturation(m, (1.0 - g) * mu_nodes[c] + g * mu_nodes[c + 1]));
        return s;
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const
    {
        const int n = nodes();
        const double h = length / cells;
        Eigen::VectorXd r = Eigen::VectorXd::Zero(size());
        const double ell = x[2 * n];
        for (int c = 0; c < cells; ++c) {
            const double mu0 = x[c], mu1 = x[c + 1];
            const double p0 = x[n + c], p1 = x[n + c + 1];
            const double dmu = (mu1 - mu0) / h;
            const double dp = (p1 - p0) / h;
            int k = 0;
            for (double g : gauss()) {
                const double w = 0.5 * h;
                const double s = saturation(m, (1.0 - g) * mu0 + g * mu1);
                const double lw = lambda_w(m, s);
                const double lt = lw + lambda_n(m, s);
                const double storage = (s - s_old[static_cast<std::size_t>(2 * c + k)]) / tau;
                const double shape[2] = {1.0 - g, g};
                const double grad[2] = {-1.0 / h, 1.0 / h};
                for (int a = 0; a < 2; ++a) {
                    r[c + a] += w * (storage * shape[a] + lw * (dmu + dp) * grad[a] - q_w * shape[a]);
                    r[n + c + a] +=
                        w * (lt * dp * grad[a] + lw * dmu * grad[a] - (q_w + q_n) * shape[a]);
                }
                ++k;
            }
        }
        // Mean constraint weights: int N_a / |Omega|.
        for (int a = 0; a < n; ++a) {
            const double ca = (a == 0 || a == n - 1 ? 0.5 : 1.0) * h / length;
            r[n + a] += ell * ca;
            r[2 * n] += ca * x[n + a];
        }
        return r;
    }

    /// Damped Newton with a central-difference dense Jacobian.
    Eigen::VectorXd solve(Eigen::VectorXd x, int max_iters = 100) const
    {
        for (int it = 0; it < max_iters; ++it) {
            const Eigen::VectorXd r = residual(x);
            if (r.norm() < 1e-14)
                break;
            Eigen::MatrixXd j(size(), size());
            for (int k = 0; k < size(); ++k) {
                const double e = 1e-6 * std::max(1.0, std::abs(x[k]));
                Eigen::VectorXd xp = x, xm = x;
                xp[k] += e;
                xm[k] -= e;
                j.col(k) = (residual(xp) - residual(xm)) / (2.0 * e);
            }
            const Eigen::VectorXd dx = j.fullPivLu().solve(-r);
            double a = 1.0;
            while (a > 1e-8 && residual(x + a * dx).norm() >= r.norm())
                a *= 0.5;
            x += a * dx;
        }
        return x;
    }
};

} // namespace oracle

inline double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace porflow::fixtures
