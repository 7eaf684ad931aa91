#include "adaptsde/linear_solver.hpp"
#include "adaptsde/problems.hpp"
#include "adaptsde/schemes.hpp"
#include "adaptsde/wiener.hpp"

#include <benchmark/benchmark.h>

using namespace adaptsde;

namespace {

// Fixed-step kernels on the SPDE system, where per-step cost differs most.
void BM_SpdeStep(benchmark::State& state)
{
    const auto scheme = static_cast<SchemeId>(state.range(0));
    const SdeProblem p = problems::spde_fd();
    ShiftedSolver solver(p.A, p.structure);
    const Vector dW = Vector::Constant(p.m, 0.01);
    const double h = 0.005;
    for (auto _ : state) {
        Vector y;
        switch (scheme) {
        case SchemeId::adaptive_semi_implicit: y = step_semi_implicit(p, solver, p.x0, h, dW); break;
        case SchemeId::drift_implicit: y = step_drift_implicit(p, p.x0, h, dW).y; break;
        case SchemeId::balanced: y = step_balanced(p, p.x0, h, dW); break;
        case SchemeId::increment_tamed: y = step_increment_tamed(p, p.x0, h, dW); break;
        default: y = step_fully_tamed(p, p.x0, h, dW); break;
        }
        benchmark::DoNotOptimize(y.data());
    }
    state.SetLabel(std::string(scheme_name(scheme)));
}
BENCHMARK(BM_SpdeStep)
    ->Arg(static_cast<int>(SchemeId::adaptive_semi_implicit))
    ->Arg(static_cast<int>(SchemeId::drift_implicit))
    ->Arg(static_cast<int>(SchemeId::balanced))
    ->Arg(static_cast<int>(SchemeId::increment_tamed))
    ->Arg(static_cast<int>(SchemeId::fully_tamed));

void BM_ThomasSolve(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> lo(n, -1.0), di(n, 4.0), up(n, -1.0);
    const Vector rhs = Vector::Ones(static_cast<Eigen::Index>(n));
    for (auto _ : state) {
        Vector x = thomas_solve(lo, di, up, rhs);
        benchmark::DoNotOptimize(x.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ThomasSolve)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

void BM_BridgeRefine(benchmark::State& state)
{
    const int levels = static_cast<int>(state.range(0));
    const auto coarse = uniform_grid(1.0, 0.0025);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        WienerPath path(1, seed++);
        auto fine = path.refine_uniform(coarse, levels);
        benchmark::DoNotOptimize(fine.data());
    }
}
BENCHMARK(BM_BridgeRefine)->Arg(4)->Arg(6);

void BM_AdaptiveSolve(benchmark::State& state)
{
    const auto names = problems::names();
    const auto p = *problems::by_name(names[static_cast<std::size_t>(state.range(0))]);
    const MeshConfig config(0.0025, 100.0);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        WienerPath path(p.m, seed++);
        auto r = solve(p, SchemeId::adaptive_semi_implicit, path, AdaptivePlan{config});
        benchmark::DoNotOptimize(r.y_terminal.data());
    }
    state.SetLabel(p.name);
}
BENCHMARK(BM_AdaptiveSolve)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
