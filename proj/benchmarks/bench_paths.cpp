#include "mlsm/path_simulator.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_SimulatePaths(benchmark::State& state) {
    const auto n_assets = static_cast<std::size_t>(state.range(1));
    const auto params = mlsm::ModelParams::uniform(n_assets, 100.0, 0.04, 0.2, 0.3);
    const auto n_paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto paths = mlsm::simulate_paths(params, n_paths, 50, 1.0, mlsm::SteppingScheme::exact_lognormal, 42);
        benchmark::DoNotOptimize(paths.raw().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_paths * 50 * n_assets));
}
BENCHMARK(BM_SimulatePaths)->Args({10000, 1})->Args({10000, 3})->Args({100000, 1})->Unit(benchmark::kMillisecond);

void BM_SimulateTerminal(benchmark::State& state) {
    const auto params = mlsm::ModelParams::single(100.0, 0.04, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(mlsm::simulate_terminal(params, 100000, 1.0, 42).data());
}
BENCHMARK(BM_SimulateTerminal)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
