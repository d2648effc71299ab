#pragma once

#include "porflow/assembly.hpp"

namespace porflow {

/// One time level: nodal potential, pressure and the derived saturation S(mu).
struct State
{
    double t = 0.0;
    FieldCoefficients mu;
    FieldCoefficients p;
    FieldCoefficients s;
};

/// Builds a State, filling s by nodal inversion of mu.
State make_state(const ProblemData& data, double t, FieldCoefficients mu, FieldCoefficients p);

} // namespace porflow
