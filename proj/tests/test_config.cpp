#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "porflow/config.hpp"
#include "porflow/output.hpp"
#include "porflow/simulation.hpp"

using namespace porflow;

namespace {

bool has_issue(const ConfigError& e, const std::string& key, const std::string& fragment = "")
{
    for (const auto& i : e.issues())
        if (i.key == key && i.reason.find(fragment) != std::string::npos)
            return true;
    return false;
}

ConfigError expect_error(const std::string& text)
{
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "config accepted:\n" << text;
    return ConfigError(std::vector<ConfigIssue>{});
}

} // namespace

TEST(Config, MinimalClosedConfigFillsDefaults)
{
    const RunConfig c = parse_config_text("[run]\ntau = 0.02\n");
    EXPECT_DOUBLE_EQ(c.tau, 0.02);
    EXPECT_EQ(c.mesh.dim, 1);
    EXPECT_EQ(c.material, MaterialParams{});
    EXPECT_EQ(c.newton, NewtonConfig{});
    EXPECT_EQ(c.mesh.tags.size(), 2u);
    EXPECT_TRUE(build_problem(c).is_closed());
}

TEST(Config, PresetThenOverrides)
{
    const RunConfig c = parse_config_text("[run]\npreset = closed_2d\n[mesh]\ncells_x = 4\n",
                                          {"material.gamma_wn=0.5", "output.vtk=true"});
    EXPECT_EQ(c.mesh.dim, 2);
    EXPECT_EQ(c.mesh.cells[0], 4);
    EXPECT_EQ(c.mesh.cells[1], 16);
    EXPECT_DOUBLE_EQ(c.material.gamma_wn, 0.5);
    EXPECT_TRUE(c.output.vtk);
    EXPECT_EQ(c.mesh.tags.size(), 4u);
}

TEST(Config, AdmissibilityViolationCitesAssumption2)
{
    // (sqrt(1) + sqrt(1))^2 = 4.
    const ConfigError e = expect_error("[material]\ngamma_wn = 4\n");
    EXPECT_TRUE(has_issue(e, "material.gamma_wn", "Assumption 2"));
    const ConfigError zero = expect_error("[material]\ngamma_wn = 2\n");
    EXPECT_TRUE(has_issue(zero, "material.gamma_wn", "Assumption 2"));
}

TEST(Config, NonPositiveTauRejected)
{
    EXPECT_TRUE(has_issue(expect_error("[run]\ntau = 0\n"), "run.tau"));
    EXPECT_TRUE(has_issue(expect_error("[run]\ntau = -0.1\n"), "run.tau"));
}

TEST(Config, SyntaxErrorCarriesLine)
{
    const ConfigError e = expect_error("[run]\ntau = 0.1\n[mesh\ncells_x = 3\n");
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_EQ(e.issues()[0].key, "<config>:3");
}

TEST(Config, CollectsAllIssues)
{
    const ConfigError e = expect_error("[run]\ntau = abc\nbogus = 1\n[mesh]\ndim = 2\nleft = wall\n");
    EXPECT_TRUE(has_issue(e, "run.tau", "finite number"));
    EXPECT_TRUE(has_issue(e, "run.bogus", "unknown key"));
    EXPECT_TRUE(has_issue(e, "mesh.left", "gamma1 or gamma2"));
}

TEST(Config, InitialAndBoundaryRangesCiteAssumption4)
{
    EXPECT_TRUE(has_issue(expect_error("[initial]\nsaturation = 0.95\n"), "initial", "Assumption 4"));
    EXPECT_TRUE(has_issue(expect_error("[initial]\nprofile = cosine\nsaturation = 0.5\namplitude = 0.45\n"),
                          "initial", "Assumption 4"));
    EXPECT_TRUE(has_issue(expect_error("[mesh]\nleft = gamma1\n[boundary]\nsaturation = 0.05\n"),
                          "boundary.saturation", "Assumption 4"));
    EXPECT_TRUE(has_issue(expect_error("[material]\nphi_m = 0.5\nporosity = 0.4\n"), "material.porosity",
                          "Assumption 1"));
}

TEST(Config, UnknownPresetRejected)
{
    EXPECT_TRUE(has_issue(expect_error("[run]\npreset = nope\n"), "run.preset"));
}

TEST(Config, MissingFileRejected)
{
    EXPECT_THROW(parse_config("/nonexistent/porflow.ini"), ConfigError);
}

TEST(ConfigRoundTrip, PresetsReparseEqual)
{
    for (const auto& name : preset_names()) {
        const RunConfig c = preset_config(name);
        const RunConfig again = parse_config_text(serialize(c));
        EXPECT_EQ(again, c) << name;
        EXPECT_EQ(serialize(again), serialize(c)) << name;
    }
}

TEST(ConfigRoundTrip, RandomConfigsReparseEqual)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        RunConfig c = preset_config(k % 2 ? "closed_2d" : "driven_dirichlet_1d");
        c.tau = 1e-3 + u(rng) / 3.0;
        c.final_time = 1.0 + u(rng);
        c.material.gamma_w = 0.5 + u(rng);
        c.material.gamma_n = 0.5 + u(rng);
        c.material.gamma_wn = 0.4 * u(rng);
        c.material.s_eps = 0.05 + 0.1 * u(rng);
        c.material.eta_n = 0.1 + u(rng);
        c.porosity = 0.5 + 0.5 * u(rng);
        c.material.phi_m = 0.5;
        c.initial.saturation = 0.3 + 0.4 * u(rng);
        c.initial.amplitude = 0.1 * u(rng);
        c.boundary.dirichlet_saturation = 0.3 + 0.4 * u(rng);
        c.boundary.flux_w = u(rng) - 0.5;
        c.newton.abs_tol = 1e-12 * (1.0 + u(rng));
        c.newton.linear.kind = k % 3 ? LinearSolverKind::direct : LinearSolverKind::iterative;
        c.table.s_min = 0.2 * u(rng) + 0.01;
        c.output.dir = "out/run_" + std::to_string(k);
        const RunConfig again = parse_config_text(serialize(c));
        EXPECT_EQ(again, c) << serialize(c);
    }
}

TEST(BuildProblem, ProfilesAndBoundaryData)
{
    RunConfig c = preset_config("driven_dirichlet_1d");
    const ProblemData d = build_problem(c);
    EXPECT_TRUE(d.mesh.has_dirichlet());
    EXPECT_NEAR(d.mu_dirichlet({0, 0}, 0.0), d.model.chemical_potential(0.7), 1e-15);
    EXPECT_NEAR(d.model.invert_mu(d.initial_mu({0.5, 0}, 0.0)), 0.3, 1e-14);

    c = preset_config("closed_1d");
    c.initial.profile = InitialProfile::step;
    c.initial.left = 0.2;
    c.initial.right = 0.6;
    const ProblemData s = build_problem(c);
    EXPECT_NEAR(s.model.invert_mu(s.initial_mu({0.1, 0}, 0.0)), 0.2, 1e-14);
    EXPECT_NEAR(s.model.invert_mu(s.initial_mu({0.9, 0}, 0.0)), 0.6, 1e-14);
}

TEST(Output, LedgerAndTableFormats)
{
    std::ostringstream ledger;
    LedgerWriter w(ledger);
    StepReport r;
    r.t_new = 0.5;
    r.energy_inequality_ok = true;
    w.write(1, r);
    const std::string text = ledger.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), LedgerWriter::header());
    EXPECT_NE(text.find("\n1,0.5,"), std::string::npos);

    std::ostringstream table;
    write_constitutive_table(table, ConstitutiveModel({}), 3, 0.1, 0.9);
    std::istringstream lines(table.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line))
        ++count;
    EXPECT_EQ(count, 4);
    EXPECT_NE(table.str().find("0.10000000000000001,"), std::string::npos);
}

TEST(Output, FieldCsvAndVtk)
{
    RunConfig c = preset_config("closed_2d");
    c.mesh.cells = {2, 2};
    const ProblemData d = build_problem(c);
    const State s = initialize(d);
    std::ostringstream csv, vtk;
    write_fields_csv(csv, s, d);
    write_fields_vtk(vtk, s, d);
    EXPECT_EQ(csv.str().substr(0, 28), "node,x,y,S,mu,p,psi,theta\n0,");
    EXPECT_NE(vtk.str().find("DIMENSIONS 3 3 1"), std::string::npos);
    EXPECT_NE(vtk.str().find("SCALARS theta double 1"), std::string::npos);
}
