#include <benchmark/benchmark.h>

#include "distcap/fraccalc.hpp"
#include "distcap/galerkin.hpp"
#include "distcap/kernels.hpp"

using namespace distcap;

namespace {

const WeightFunction& bench_weight() {
    static WeightFunction mu = WeightFunction::indicator(0.4, 0.6);
    return mu;
}

}  // namespace

static void BM_MittagLeffler(benchmark::State& state) {
    double x = -0.7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mittag_leffler(0.5, 1.0, x));
        x = x >= 0.0 ? -0.7 : x + 0.01;
    }
}
BENCHMARK(BM_MittagLeffler);

static void BM_KernelK(benchmark::State& state) {
    double t = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernel_k(bench_weight(), t));
        t = t > 1.0 ? 0.5 : t + 1e-4;
    }
}
BENCHMARK(BM_KernelK);

static void BM_ResolventEval(benchmark::State& state) {
    ResolventEvaluator g(bench_weight());
    double t = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(g(t));
        t = t > 1.0 ? 0.5 : t + 1e-4;
    }
}
BENCHMARK(BM_ResolventEval);

static void BM_GTableBuild(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    TimeGrid grid(1.0, M, 2.0);
    for (auto _ : state) {
        auto tab = make_g_table(bench_weight(), grid);
        benchmark::DoNotOptimize(tab.value(M));
    }
    state.SetComplexityN(M);
}
BENCHMARK(BM_GTableBuild)->Arg(128)->Arg(256)->Arg(512)->Complexity();

static void BM_ConvolutionPlanBuild(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    TimeGrid grid(1.0, M, 2.0);
    auto tab = make_g_table(bench_weight(), grid);
    for (auto _ : state) {
        ConvolutionPlan plan(tab, grid);
        benchmark::DoNotOptimize(plan.self_weight(M));
    }
    state.SetComplexityN(M);
}
BENCHMARK(BM_ConvolutionPlanBuild)->Arg(128)->Arg(256)->Arg(512)->Complexity();

static void BM_ConvolutionApply(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    TimeGrid grid(1.0, M, 2.0);
    auto tab = make_g_table(bench_weight(), grid);
    ConvolutionPlan plan(tab, grid);
    SampledTrajectory f(grid, 1);
    for (int j = 0; j <= M; ++j) f.at(j) = std::sin(3.0 * grid.node(j));
    for (auto _ : state) {
        auto v = plan.apply(f);
        benchmark::DoNotOptimize(v.at(M));
    }
    state.SetComplexityN(M);
}
BENCHMARK(BM_ConvolutionApply)->Arg(128)->Arg(256)->Arg(512)->Complexity();

static void BM_SolveRelaxation(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    TimeGrid grid(1.0, M, 4.0);
    auto tab = make_g_table(bench_weight(), grid);
    auto A = [](double, Mat& A) {
        A = Mat(4);
        for (int k = 0; k < 4; ++k) A(k, k) = (k + 1.0) * (k + 1.0);
    };
    auto F = [](double, std::vector<double>& F) { F.assign(4, 0.0); };
    for (auto _ : state) {
        auto sol = solve_volterra(tab, A, F, {1.0, 0.5, 0.25, 0.125}, grid);
        benchmark::DoNotOptimize(sol.coeffs.at(M, 0));
    }
}
BENCHMARK(BM_SolveRelaxation)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
