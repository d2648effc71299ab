#pragma once

#include <cmath>
#include <string>

#include "porflow/errors.hpp"

namespace porflow {

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, double min_width)
{
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (b - a <= min_width)
        throw ConvergenceError("adaptive_simpson: interval floor reached near x = " +
                               std::to_string(m));
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, min_width) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, min_width);
}

} // namespace detail

template <class F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol, double min_width)
{
    if (a == b)
        return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Scale the tolerance by a crude magnitude estimate of the integral.
    const double scale = std::abs(b - a) * (std::abs(fa) + std::abs(fm) + std::abs(fb)) / 3.0;
    const double tol = rel_tol * (scale > 0.0 ? scale : 1.0);
    return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, min_width);
}

} // namespace porflow
