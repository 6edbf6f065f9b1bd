#include "mlsm/recurrent.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_LstmStep(benchmark::State& state) {
    const auto h = static_cast<std::size_t>(state.range(0));
    const auto p = mlsm::LstmParams::zeros(16, h);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(16, 0.1), s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h));
    for (auto _ : state) benchmark::DoNotOptimize(mlsm::lstm_step(p, x, s, s).h.data());
    state.counters["flops"] = static_cast<double>(mlsm::lstm_step_flops(16, h));
}

void BM_GruStep(benchmark::State& state) {
    const auto h = static_cast<std::size_t>(state.range(0));
    const auto p = mlsm::GruParams::zeros(16, h);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(16, 0.1), s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h));
    for (auto _ : state) benchmark::DoNotOptimize(mlsm::gru_step(p, x, s).data());
    state.counters["flops"] = static_cast<double>(mlsm::gru_step_flops(16, h));
}
BENCHMARK(BM_LstmStep)->Arg(8)->Arg(200);
BENCHMARK(BM_GruStep)->Arg(8)->Arg(200);

void BM_TrainEpoch(benchmark::State& state) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(1000, 8);
    const Eigen::VectorXd y = x.rowwise().sum();
    mlsm::NetworkConfig cfg;
    cfg.cell = state.range(0) == 0 ? mlsm::CellKind::lstm : mlsm::CellKind::gru;
    cfg.hidden_sizes = {32};
    cfg.epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(mlsm::train(cfg, x, y).history.back().train_mse);
    state.SetLabel(mlsm::to_string(cfg.cell));
}
BENCHMARK(BM_TrainEpoch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
