#include "mlsm/lsm_engine.hpp"

#include <benchmark/benchmark.h>

namespace {

const mlsm::OptionSpec kPut{mlsm::OptionKind::put, mlsm::ExerciseStyle::american, 100.0, 1.0};

// Backward induction only; paths are simulated once outside the loop.
void run_lsm(benchmark::State& state, const mlsm::EstimatorConfig& estimator) {
    const auto params = mlsm::ModelParams::single(100.0, 0.02, 0.4);
    mlsm::LsmConfig cfg;
    cfg.n_paths = 10000;
    cfg.n_steps = 25;
    cfg.estimator = estimator;
    cfg.regression_scope = mlsm::RegressionScope::all_paths;
    if (std::holds_alternative<mlsm::LogisticConfig>(estimator)) cfg.decision_mode = mlsm::DecisionMode::classifier;
    const auto paths = mlsm::simulate_paths(params, cfg.n_paths, cfg.n_steps, 1.0, cfg.scheme, cfg.seed);
    for (auto _ : state) benchmark::DoNotOptimize(mlsm::price_american_lsm(kPut, params, paths, cfg).pricing.price);
}

void BM_LsmPolynomial(benchmark::State& s) { run_lsm(s, mlsm::PolynomialBasisConfig{2, {}}); }
void BM_LsmKnn(benchmark::State& s) { run_lsm(s, mlsm::KnnConfig{}); }
void BM_LsmTree(benchmark::State& s) { run_lsm(s, mlsm::TreeConfig{}); }
void BM_LsmForest(benchmark::State& s) { run_lsm(s, mlsm::ForestConfig{}); }
void BM_LsmBoost(benchmark::State& s) { run_lsm(s, mlsm::BoostConfig{}); }
void BM_LsmLogistic(benchmark::State& s) { run_lsm(s, mlsm::LogisticConfig{}); }
BENCHMARK(BM_LsmPolynomial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LsmKnn)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LsmTree)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LsmForest)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LsmBoost)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LsmLogistic)->Unit(benchmark::kMillisecond);

void BM_Binomial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(mlsm::price_american_binomial(kPut, 100.0, 0.04, 0.2, n));
}
BENCHMARK(BM_Binomial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
