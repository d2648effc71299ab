#include <benchmark/benchmark.h>

#include "porflow/config.hpp"
#include "porflow/simulation.hpp"

using namespace porflow;

static void BM_InvertMu(benchmark::State& state)
{
    const ConstitutiveModel model({1.0, 1.0, 0.5});
    double mu = -6.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.invert_mu(mu));
        mu = mu > 6.0 ? -6.0 : mu + 0.013;
    }
}
BENCHMARK(BM_InvertMu);

static void BM_JacobianAssembly(benchmark::State& state)
{
    RunConfig cfg = preset_config("closed_2d");
    const int n = static_cast<int>(state.range(0));
    cfg.mesh.cells = {n, n};
    const ProblemData data = build_problem(cfg);
    const State s0 = initialize(data);
    const StepProblem prob(data, quadrature_saturation(data, s0.mu), cfg.tau, cfg.tau);
    const Eigen::VectorXd x = prob.pack(s0.mu, s0.p);
    for (auto _ : state)
        benchmark::DoNotOptimize(prob.jacobian(x));
    state.SetComplexityN(n * n);
}
BENCHMARK(BM_JacobianAssembly)->Arg(16)->Arg(32)->Arg(64);

static void BM_ImplicitStep(benchmark::State& state)
{
    RunConfig cfg = preset_config(state.range(0) == 1 ? "closed_1d" : "closed_2d");
    const ProblemData data = build_problem(cfg);
    const State s0 = initialize(data);
    for (auto _ : state)
        benchmark::DoNotOptimize(newton_step_solve(s0, cfg.tau, data, cfg.newton));
}
BENCHMARK(BM_ImplicitStep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
