#include "mlsm/regression.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

struct Data {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Data make_data(Eigen::Index n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    Data d{Eigen::MatrixXd(n, 1), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        d.x(i, 0) = 100.0 + 20.0 * z(rng);
        d.y(i) = std::max(100.0 - d.x(i, 0), 0.0) + z(rng);
    }
    return d;
}

void fit_predict(benchmark::State& state, const mlsm::EstimatorConfig& cfg) {
    const auto d = make_data(state.range(0));
    for (auto _ : state) {
        auto est = mlsm::make_estimator(cfg);
        est->fit(d.x, d.y);
        benchmark::DoNotOptimize(est->predict(d.x).data());
    }
    state.SetComplexityN(state.range(0));
}

void BM_Polynomial(benchmark::State& s) { fit_predict(s, mlsm::PolynomialBasisConfig{3, {}}); }
void BM_Knn(benchmark::State& s) { fit_predict(s, mlsm::KnnConfig{}); }
void BM_Tree(benchmark::State& s) { fit_predict(s, mlsm::TreeConfig{}); }
void BM_Forest(benchmark::State& s) { fit_predict(s, mlsm::ForestConfig{}); }
void BM_Boost(benchmark::State& s) { fit_predict(s, mlsm::BoostConfig{}); }
BENCHMARK(BM_Polynomial)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Knn)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Tree)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Forest)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Boost)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMillisecond);

}  // namespace
