#include "porflow/output.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace porflow {

LedgerWriter::LedgerWriter(std::ostream& os) : os_(&os)
{
    *os_ << header() << '\n';
}

const char* LedgerWriter::header()
{
    return "step,t,tau,energy,energy_old,mass,s_min,s_max,convexity_sum,convexity_sum_pointwise,"
           "diss_n,diss_w,energy_lhs,energy_rhs,energy_tol,energy_ok,newton_iterations,"
           "line_search_rejections,linear_iterations,substeps,fallback_depth,final_residual";
}

void LedgerWriter::write(int step, const StepReport& r)
{
    std::ostream& os = *os_;
    const auto old_precision = os.precision(17);
    os << step << ',' << r.t_new << ',' << r.tau << ',' << r.energy_new << ',' << r.energy_old << ','
       << r.mass << ',' << r.s_min << ',' << r.s_max << ',' << r.convexity_sum << ','
       << r.convexity_sum_pointwise << ',' << r.diss_n << ',' << r.diss_w << ',' << r.energy_lhs << ','
       << r.energy_rhs << ',' << r.energy_tol << ',';
    if (r.energy_inequality_ok)
        os << (*r.energy_inequality_ok ? 1 : 0);
    os << ',' << r.solver.iterations << ',' << r.solver.line_search_rejections << ','
       << r.solver.linear_iterations << ',' << r.solver.substeps << ',' << r.solver.fallback_depth << ','
       << r.solver.final_residual << '\n';
    os.precision(old_precision);
}

void write_fields_csv(std::ostream& os, const State& state, const ProblemData& data)
{
    const Mesh& mesh = data.mesh;
    const PressureTransforms tr = pressure_transforms(state, data);
    os << (mesh.dim() == 2 ? "node,x,y,S,mu,p,psi,theta\n" : "node,x,S,mu,p,psi,theta\n");
    const auto old_precision = os.precision(17);
    for (int i = 0; i < mesh.node_count(); ++i) {
        os << i << ',' << mesh.node(i).x;
        if (mesh.dim() == 2)
            os << ',' << mesh.node(i).y;
        os << ',' << state.s[i] << ',' << state.mu[i] << ',' << state.p[i] << ',' << tr.psi[i] << ','
           << tr.theta[i] << '\n';
    }
    os.precision(old_precision);
}

void write_fields_vtk(std::ostream& os, const State& state, const ProblemData& data)
{
    const Mesh& mesh = data.mesh;
    const PressureTransforms tr = pressure_transforms(state, data);
    const auto h = mesh.cell_size();
    const auto old_precision = os.precision(17);
    os << "# vtk DataFile Version 3.0\n"
       << "porflow fields t=" << state.t << "\n"
       << "ASCII\n"
       << "DATASET STRUCTURED_POINTS\n"
       << "DIMENSIONS " << mesh.nodes_x() << ' ' << mesh.nodes_y() << " 1\n"
       << "ORIGIN 0 0 0\n"
       << "SPACING " << h[0] << ' ' << (mesh.dim() == 2 ? h[1] : 1.0) << " 1\n"
       << "POINT_DATA " << mesh.node_count() << '\n';
    auto scalars = [&](const char* name, const FieldCoefficients& f) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int i = 0; i < f.size(); ++i)
            os << f[i] << '\n';
    };
    scalars("S", state.s);
    scalars("mu", state.mu);
    scalars("p", state.p);
    scalars("psi", tr.psi);
    scalars("theta", tr.theta);
    os.precision(old_precision);
}

void write_constitutive_table(std::ostream& os, const ConstitutiveModel& model, int points, double s_min,
                              double s_max)
{
    if (points < 2)
        throw ValidationError("constitutive table needs at least two points");
    os << "S,F,mu,dmu_dS,p_c,lambda_w,lambda_n,psi_shift,theta\n";
    const auto old_precision = os.precision(17);
    for (int i = 0; i < points; ++i) {
        const double s = i + 1 == points ? s_max : s_min + (s_max - s_min) * i / (points - 1);
        os << s << ',' << model.free_energy(s) << ',' << model.chemical_potential(s) << ','
           << model.dmu_dS(s) << ',' << model.capillary_pressure(s) << ','
           << model.mobility(s, Phase::wetting) << ',' << model.mobility(s, Phase::nonwetting) << ','
           << model.artificial_pressure_shift(s) << ',' << model.complementary_pressure(s) << '\n';
    }
    os.precision(old_precision);
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

} // namespace porflow
