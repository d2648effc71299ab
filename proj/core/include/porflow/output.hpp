#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>

#include "porflow/diagnostics.hpp"

namespace porflow {

/// Streams StepReports as CSV rows; the header is written on construction.
class LedgerWriter
{
public:
    explicit LedgerWriter(std::ostream& os);
    void write(int step, const StepReport& report);

    static const char* header();

private:
    std::ostream* os_;
};

/// node,x[,y],S,mu,p,psi,theta
void write_fields_csv(std::ostream& os, const State& state, const ProblemData& data);

/// Legacy VTK structured points with S, mu, p, psi, theta point data.
void write_fields_vtk(std::ostream& os, const State& state, const ProblemData& data);

/// S,F,mu,dmu_dS,p_c,lambda_w,lambda_n,psi_shift,theta over \p points
/// uniformly spaced saturations in [s_min, s_max], 17 significant digits.
void write_constitutive_table(std::ostream& os, const ConstitutiveModel& model, int points, double s_min,
                              double s_max);

/// Opens \p path for writing, creating parent directories; throws
/// std::runtime_error on failure.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace porflow
