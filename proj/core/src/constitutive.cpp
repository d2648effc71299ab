#include "porflow/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace porflow {

namespace {

void require_open_unit(double s, const char* what)
{
    if (!(s > 0.0 && s < 1.0)) {
        std::ostringstream os;
        os << what << ": saturation " << s << " outside (0,1)";
        throw DomainError(os.str());
    }
}

constexpr double kBracketDelta = 1e-12;
constexpr int kInvertMaxIters = 200;
constexpr double kTransformRelTol = 1e-10;

} // namespace

RelPermKind parse_rel_perm_kind(std::string_view name)
{
    if (name == "quadratic")
        return RelPermKind::quadratic;
    if (name == "linear")
        return RelPermKind::linear;
    throw ValidationError("unknown relative permeability model '" + std::string(name) + "'");
}

std::string_view to_string(RelPermKind kind)
{
    return kind == RelPermKind::quadratic ? "quadratic" : "linear";
}

double admissibility_margin(double gamma_w, double gamma_n, double gamma_wn)
{
    const double root_sum = std::sqrt(gamma_w) + std::sqrt(gamma_n);
    return root_sum * root_sum - 2.0 * gamma_wn;
}

double check_admissibility(const MaterialParams& p)
{
    const double fields[] = {p.gamma_w, p.gamma_n, p.gamma_wn, p.eta_w,
                             p.eta_n,   p.s_eps,   p.phi_m,    p.c_min};
    for (double v : fields)
        if (!std::isfinite(v))
            throw ValidationError("material parameters must be finite");
    if (p.gamma_w <= 0.0 || p.gamma_n <= 0.0)
        throw ValidationError("gamma_w and gamma_n must be positive");
    if (p.gamma_wn < 0.0)
        throw ValidationError("gamma_wn must be non-negative");
    if (p.eta_w <= 0.0 || p.eta_n <= 0.0)
        throw ValidationError("viscosities must be positive");
    if (!(p.s_eps > 0.0 && p.s_eps < 0.5))
        throw ValidationError("s_eps must lie in (0, 1/2)");
    if (!(p.phi_m > 0.0 && p.phi_m <= 1.0))
        throw ValidationError("phi_m must lie in (0, 1]");

    const double margin = admissibility_margin(p.gamma_w, p.gamma_n, p.gamma_wn);
    if (!(margin > 0.0)) {
        std::ostringstream os;
        os << "Assumption 2 (energy admissibility) violated: (sqrt(gamma_w)+sqrt(gamma_n))^2"
              " - 2 gamma_wn = "
           << margin << " <= 0";
        throw AdmissibilityError(os.str(), margin);
    }
    return margin;
}

ConstitutiveModel::ConstitutiveModel(const MaterialParams& params, RelPermKind kind)
    : params_(params), kind_(kind)
{
    const double margin = check_admissibility(params_);
    if (params_.c_min < 0.0)
        throw ValidationError("c_min override must be positive");
    if (params_.c_min > 0.0) {
        if (params_.c_min > margin) {
            std::ostringstream os;
            os << "Assumption 2: c_min override " << params_.c_min
               << " exceeds the admissibility margin " << margin;
            throw AdmissibilityError(os.str(), margin);
        }
        c_min_ = params_.c_min;
    }
    else {
        c_min_ = margin;
    }

    const double lo = params_.s_eps;
    const double hi = 1.0 - params_.s_eps;
    lambda_min_ = std::min({mobility(lo, Phase::wetting), mobility(hi, Phase::nonwetting),
                            mobility(hi, Phase::wetting), mobility(lo, Phase::nonwetting)});
    lambda_max_ = std::max({mobility(lo, Phase::wetting), mobility(hi, Phase::nonwetting),
                            mobility(hi, Phase::wetting), mobility(lo, Phase::nonwetting)});

    // dmu/dS is convex on (0,1): minimum at the clamped critical point,
    // maximum at one of the endpoints.
    const double sw = std::sqrt(params_.gamma_w);
    const double s_star = std::clamp(sw / (sw + std::sqrt(params_.gamma_n)), lo, hi);
    lipschitz_ = {dmu_dS(s_star), std::max(dmu_dS(lo), dmu_dS(hi))};
}

double ConstitutiveModel::free_energy(double s) const
{
    require_open_unit(s, "free_energy");
    const auto& p = params_;
    return p.gamma_w * s * (std::log(s) - 1.0) + p.gamma_n * (1.0 - s) * (std::log1p(-s) - 1.0) +
           p.gamma_wn * s * (1.0 - s);
}

double ConstitutiveModel::chemical_potential(double s) const
{
    require_open_unit(s, "chemical_potential");
    const auto& p = params_;
    return p.gamma_w * std::log(s) - p.gamma_n * std::log1p(-s) + p.gamma_wn * (1.0 - 2.0 * s);
}

double ConstitutiveModel::dmu_dS(double s) const
{
    require_open_unit(s, "dmu_dS");
    const auto& p = params_;
    return p.gamma_w / s + p.gamma_n / (1.0 - s) - 2.0 * p.gamma_wn;
}

double ConstitutiveModel::d2mu_dS2(double s) const
{
    require_open_unit(s, "d2mu_dS2");
    const auto& p = params_;
    return -p.gamma_w / (s * s) + p.gamma_n / ((1.0 - s) * (1.0 - s));
}

double ConstitutiveModel::phase_potential(double s, Phase phase) const
{
    require_open_unit(s, "phase_potential");
    const auto& p = params_;
    if (phase == Phase::wetting)
        return p.gamma_w * std::log(s) + p.gamma_wn * (1.0 - s);
    return p.gamma_n * std::log1p(-s) + p.gamma_wn * s;
}

double ConstitutiveModel::capillary_pressure(double s) const
{
    return phase_potential(s, Phase::nonwetting) - phase_potential(s, Phase::wetting);
}

double ConstitutiveModel::invert_mu(double mu) const
{
    if (!std::isfinite(mu))
        throw DomainError("invert_mu: non-finite potential");
    const auto& p = params_;

    double lo = kBracketDelta;
    double hi = 1.0 - kBracketDelta;

    // Roots outside [delta, 1-delta] sit on a log tail where the map below
    // is a strong contraction.
    if (chemical_potential(lo) >= mu) {
        double s = lo;
        for (int it = 0; it < kInvertMaxIters; ++it) {
            const double next =
                std::exp((mu + p.gamma_n * std::log1p(-s) - p.gamma_wn * (1.0 - 2.0 * s)) / p.gamma_w);
            if (std::abs(next - s) <= 1e-15 * s) {
                s = next;
                break;
            }
            s = next;
        }
        return std::max(s, std::numeric_limits<double>::min());
    }
    if (chemical_potential(hi) <= mu) {
        double u = kBracketDelta;  // 1 - S
        for (int it = 0; it < kInvertMaxIters; ++it) {
            const double s = 1.0 - u;
            const double next =
                std::exp(-(mu - p.gamma_w * std::log(s) - p.gamma_wn * (1.0 - 2.0 * s)) / p.gamma_n);
            if (std::abs(next - u) <= 1e-15 * u) {
                u = next;
                break;
            }
            u = next;
        }
        return std::min(1.0 - u, std::nextafter(1.0, 0.0));
    }

    // Logistic initial guess, exact when gamma_w = gamma_n and gamma_wn = 0.
    const double g = 0.5 * (p.gamma_w + p.gamma_n);
    double s = std::clamp(1.0 / (1.0 + std::exp(-mu / g)), lo, hi);
    if (!(s > lo && s < hi))
        s = 0.5 * (lo + hi);

    for (int it = 0; it < kInvertMaxIters; ++it) {
        const double f = chemical_potential(s) - mu;
        if (f == 0.0)
            return s;
        if (f < 0.0)
            lo = s;
        else
            hi = s;
        double next = s - f / dmu_dS(s);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-15 + 4.0 * std::numeric_limits<double>::epsilon() * s ||
            hi - lo <= 1e-15)
            return next;
        s = next;
    }
    std::ostringstream os;
    os << "invert_mu: no convergence for mu = " << mu << " after " << kInvertMaxIters
       << " iterations";
    throw ConvergenceError(os.str());
}

double ConstitutiveModel::clamp(double s) const
{
    return std::clamp(s, params_.s_eps, 1.0 - params_.s_eps);
}

double ConstitutiveModel::rel_perm(double s, Phase phase) const
{
    const double x = phase == Phase::wetting ? s : 1.0 - s;
    return kind_ == RelPermKind::quadratic ? x * x : x;
}

double ConstitutiveModel::drel_perm(double s, Phase phase) const
{
    const double sign = phase == Phase::wetting ? 1.0 : -1.0;
    const double x = phase == Phase::wetting ? s : 1.0 - s;
    return sign * (kind_ == RelPermKind::quadratic ? 2.0 * x : 1.0);
}

double ConstitutiveModel::mobility(double s, Phase phase) const
{
    const double eta = phase == Phase::wetting ? params_.eta_w : params_.eta_n;
    return rel_perm(clamp(s), phase) / eta;
}

double ConstitutiveModel::dmobility_dS(double s, Phase phase) const
{
    if (s < params_.s_eps || s > 1.0 - params_.s_eps)
        return 0.0;
    const double eta = phase == Phase::wetting ? params_.eta_w : params_.eta_n;
    return drel_perm(s, phase) / eta;
}

double ConstitutiveModel::total_mobility(double s) const
{
    return mobility(s, Phase::wetting) + mobility(s, Phase::nonwetting);
}

double ConstitutiveModel::convexity_gap(double s_old, double s_new, double mu_new) const
{
    const double ds = s_new - s_old;
    return free_energy(s_new) - free_energy(s_old) + 0.5 * c_min_ * ds * ds - ds * mu_new;
}

double ConstitutiveModel::artificial_pressure_shift(double s) const
{
    const double upper = clamp(s);
    auto integrand = [this](double x) {
        return mobility(x, Phase::wetting) / total_mobility(x) * dmu_dS(x);
    };
    return adaptive_simpson(integrand, params_.s_eps, upper, kTransformRelTol);
}

double ConstitutiveModel::complementary_pressure(double s) const
{
    const double upper = clamp(s);
    auto integrand = [this](double x) {
        return mobility(x, Phase::wetting) * mobility(x, Phase::nonwetting) / total_mobility(x) *
               dmu_dS(x);
    };
    return adaptive_simpson(integrand, params_.s_eps, upper, kTransformRelTol);
}

} // namespace porflow
