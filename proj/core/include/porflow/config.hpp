#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "porflow/assembly.hpp"
#include "porflow/mms.hpp"
#include "porflow/solver.hpp"

namespace porflow {

enum class RunMode { simulate, verify, convergence, constitutive_table };

RunMode parse_run_mode(std::string_view name);
std::string_view to_string(RunMode mode);

enum class InitialProfile { uniform, cosine, step, potential };

InitialProfile parse_initial_profile(std::string_view name);
std::string_view to_string(InitialProfile profile);

struct InitialSpec
{
    InitialProfile profile = InitialProfile::uniform;
    double saturation = 0.5;  ///< uniform value, cosine mean
    double amplitude = 0.0;   ///< cosine amplitude
    double left = 0.5;        ///< step: saturation for x < length/2
    double right = 0.5;       ///< step: saturation for x >= length/2
    double mu = 0.0;          ///< potential profile: constant mu

    bool operator==(const InitialSpec&) const = default;
};

/// Constant sources and boundary data.
struct BoundarySpec
{
    double q_w = 0.0;
    double q_n = 0.0;
    /// phi_1 on gamma1, given as the saturation whose potential is imposed.
    double dirichlet_saturation = 0.5;
    double dirichlet_pressure = 0.0;  ///< phi_3
    double flux_n = 0.0;              ///< phi_2
    double flux_w = 0.0;              ///< phi_4

    bool operator==(const BoundarySpec&) const = default;
};

struct OutputSpec
{
    std::string dir = "porflow_out";
    int stride = 0;  ///< field dump every stride steps; 0 disables field dumps
    bool vtk = false;

    bool operator==(const OutputSpec&) const = default;
};

struct TableSpec
{
    int points = 101;
    std::optional<double> s_min;  ///< default s_eps
    std::optional<double> s_max;  ///< default 1 - s_eps

    bool operator==(const TableSpec&) const = default;
};

struct MmsSpec
{
    double s_mean = 0.5;
    double s_amp = 0.2;
    double p_amp = 0.1;
    double decay = 1.0;

    bool operator==(const MmsSpec&) const = default;
};

struct RunConfig
{
    RunMode mode = RunMode::simulate;
    std::string preset;
    double tau = 0.01;
    double final_time = 1.0;
    MeshSpec mesh = MeshSpec::closed(1, {1.0, 1.0}, {32, 1});
    MaterialParams material;
    RelPermKind rel_perm = RelPermKind::quadratic;
    double porosity = 1.0;
    double permeability = 1.0;
    InitialSpec initial;
    BoundarySpec boundary;
    NewtonConfig newton;
    OutputSpec output;
    TableSpec table;
    MmsSpec mms;

    bool operator==(const RunConfig&) const = default;
};

struct ConfigIssue
{
    std::string key;
    std::string reason;
};

/// Malformed file or rejected values. what() lists every issue, one per line.
class ConfigError : public ValidationError
{
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// Names accepted by preset_config.
const std::vector<std::string>& preset_names();

/// closed_1d, closed_2d, driven_dirichlet_1d or mms_1d.
RunConfig preset_config(std::string_view name);

/// INI text, optionally followed by "section.key=value" overrides. Keys not
/// given keep the value of [run] preset (or the built-in defaults).
RunConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides = {},
                            std::string_view source = "<config>");

RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Every issue found in \p cfg; empty when the config is runnable.
std::vector<ConfigIssue> validate(const RunConfig& cfg);

/// Full INI text; parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

/// Mesh, model, coefficients and data of a simulate/verify run.
ProblemData build_problem(const RunConfig& cfg);

ManufacturedSolution build_manufactured(const RunConfig& cfg);

} // namespace porflow
