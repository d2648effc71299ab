#pragma once

#include <string_view>
#include <utility>

#include "porflow/errors.hpp"

namespace porflow {

enum class Phase { wetting, nonwetting };

enum class RelPermKind { quadratic, linear };

RelPermKind parse_rel_perm_kind(std::string_view name);
std::string_view to_string(RelPermKind kind);

/// Energy coefficients, viscosities and saturation limits of the two-phase
/// free-energy model. The energy coefficients are spatially constant.
struct MaterialParams
{
    double gamma_w = 1.0;
    double gamma_n = 1.0;
    double gamma_wn = 0.0;
    double eta_w = 1.0;
    double eta_n = 1.0;
    double s_eps = 0.1;  ///< residual saturation, in (0, 1/2)
    double phi_m = 1.0;  ///< lower porosity bound, in (0, 1]
    /// Admissibility margin override. Zero (the default) means "use the
    /// computed margin"; a positive value must not exceed it.
    double c_min = 0.0;

    bool operator==(const MaterialParams&) const = default;
};

/// (sqrt(gamma_w) + sqrt(gamma_n))^2 - 2 gamma_wn, the minimum over (0,1) of
/// dmu/dS.
double admissibility_margin(double gamma_w, double gamma_n, double gamma_wn);

/// Returns the admissibility margin of \p params, or throws
/// AdmissibilityError carrying the (non-positive) margin. Also rejects
/// non-positive coefficients, viscosities and out-of-range s_eps / phi_m
/// with ValidationError.
double check_admissibility(const MaterialParams& params);

/**
 * Free energy
 *
 *   F(S) = g_w S (ln S - 1) + g_n (1-S)(ln(1-S) - 1) + g_wn S (1-S)
 *
 * with its chemical potential mu_w = F', the monotone inverse of mu_w, the
 * clamped phase mobilities and the two Kirchhoff-type pressure transforms.
 *
 * All member functions are const and the object is immutable after
 * construction, so a model can be shared freely between threads.
 */
class ConstitutiveModel
{
public:
    ConstitutiveModel(const MaterialParams& params, RelPermKind kind = RelPermKind::quadratic);

    const MaterialParams& params() const { return params_; }
    RelPermKind rel_perm_kind() const { return kind_; }

    /// Effective admissibility constant (computed margin or user override).
    double c_min() const { return c_min_; }
    double s_eps() const { return params_.s_eps; }

    double free_energy(double s) const;
    double chemical_potential(double s) const;
    double dmu_dS(double s) const;
    double d2mu_dS2(double s) const;

    /// Wetting and non-wetting partial potentials, dF/dS_alpha of the
    /// two-variable energy.
    double phase_potential(double s, Phase phase) const;
    double capillary_pressure(double s) const;

    /// The unique S in (0,1) with chemical_potential(S) == mu.
    double invert_mu(double mu) const;

    double clamp(double s) const;
    double mobility(double s, Phase phase) const;
    /// Derivative of the clamped mobility; zero outside [s_eps, 1-s_eps].
    double dmobility_dS(double s, Phase phase) const;
    double total_mobility(double s) const;

    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }

    /// (L_min, L_max): extrema of dmu/dS over [s_eps, 1-s_eps].
    std::pair<double, double> lipschitz_bounds() const { return lipschitz_; }

    /// F(S_new) - F(S_old) + (c_min/2)(S_new - S_old)^2 - (S_new - S_old) mu_new.
    /// Non-positive whenever mu_new = chemical_potential(S_new).
    double convexity_gap(double s_old, double s_new, double mu_new) const;

    /// int_{s_eps}^{S} (lambda_w/lambda_t) dmu/dS, the shift psi - p.
    double artificial_pressure_shift(double s) const;
    /// int_{s_eps}^{S} (lambda_w lambda_n/lambda_t) dmu/dS.
    double complementary_pressure(double s) const;

private:
    double rel_perm(double s, Phase phase) const;
    double drel_perm(double s, Phase phase) const;

    MaterialParams params_;
    RelPermKind kind_;
    double c_min_ = 0.0;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
    std::pair<double, double> lipschitz_{0.0, 0.0};
};

/// Adaptive Simpson quadrature of \p f on [a, b]. Throws ConvergenceError
/// when a subinterval shrinks below \p min_width without meeting the local
/// tolerance.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol, double min_width = 1e-14);

} // namespace porflow

#include "porflow/detail/adaptive_simpson.hpp"
