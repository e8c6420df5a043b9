#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "linestab/allocator.hpp"
#include "linestab/powerflow.hpp"
#include "linestab/simulator.hpp"
#include "linestab/specfun.hpp"
#include "linestab/stability.hpp"

using namespace linestab;

static void BM_Erfi(benchmark::State& state) {
    double x = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(specfun::erfi(x));
        x = x < 5.0 ? x + 0.01 : 0.1;
    }
}
BENCHMARK(BM_Erfi);

static void BM_UInverse(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(specfun::u_inverse(0.7));
}
BENCHMARK(BM_UInverse);

static void BM_Sensitivity(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(powerflow::distflow_sensitivity(0.05, n));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Sensitivity)->RangeMultiplier(10)->Range(10, 100000)->Complexity(benchmark::oN);

static void BM_DistflowGradient(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto p = PowerAllocation::uniform(n, 1e-3 / static_cast<double>(n));
    for (auto _ : state) benchmark::DoNotOptimize(powerflow::distflow_gradient(p, 1.0));
}
BENCHMARK(BM_DistflowGradient)->RangeMultiplier(4)->Range(4, 256);

static void BM_NewtonSolve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const double target = powerflow::distflow_sensitivity(0.05, n).v_n;
    for (auto _ : state) benchmark::DoNotOptimize(stability::newton_solve_a_for_voltage(n, target));
}
BENCHMARK(BM_NewtonSolve)->RangeMultiplier(10)->Range(10, 100000);

static void BM_AllocateLinDist(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const NetworkConfig cfg{n, 1.0, 0.1};
    QueueState x{std::vector<std::int64_t>(n, 3)};
    for (auto _ : state) benchmark::DoNotOptimize(allocator::alpha_fair_lindist(x, FairnessSpec{1.0}, cfg));
}
BENCHMARK(BM_AllocateLinDist)->Arg(5)->Arg(50);

static void BM_AllocateDistflow(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const NetworkConfig cfg{n, 1.0, 0.1};
    QueueState x{std::vector<std::int64_t>(n, 0)};
    for (std::size_t j = 0; j < n; ++j) x.x[j] = static_cast<std::int64_t>(1 + j % 4);
    for (auto _ : state) benchmark::DoNotOptimize(allocator::alpha_fair_distflow(x, FairnessSpec{1.0}, cfg));
}
BENCHMARK(BM_AllocateDistflow)->Arg(3)->Arg(5)->Arg(20);

static void BM_SimulateDistflow(benchmark::State& state) {
    sim::SimConfig cfg;
    cfg.network = NetworkConfig{5, 1.0, 0.1};
    cfg.model = FlowModel::Distflow;
    cfg.arrival_rate = 0.5 * stability::lambda_dist(cfg.network);
    cfg.horizon = 1e4 / (5 * cfg.arrival_rate);
    cfg.sample_interval = cfg.horizon / 100;
    for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(cfg));
}
BENCHMARK(BM_SimulateDistflow)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
