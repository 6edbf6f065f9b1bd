#include "mlsm/error.hpp"
#include "mlsm/parallel.hpp"
#include "mlsm/path_simulator.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace mlsm;

TEST(Cholesky, Examples) {
    EXPECT_TRUE(cholesky(Eigen::Matrix2d::Identity()).lower.isApprox(Eigen::Matrix2d::Identity()));

    Eigen::Matrix2d rho;
    rho << 1.0, 0.5, 0.5, 1.0;
    const Eigen::MatrixXd b = cholesky(rho).lower;
    EXPECT_NEAR(b(0, 0), 1.0, 1e-15);
    EXPECT_EQ(b(0, 1), 0.0);
    EXPECT_NEAR(b(1, 0), 0.5, 1e-15);
    EXPECT_NEAR(b(1, 1), std::sqrt(0.75), 1e-15);
    EXPECT_LT((b * b.transpose() - rho).cwiseAbs().maxCoeff(), 1e-10);

    Eigen::Matrix2d bad;
    bad << 1.0, 1.5, 1.5, 1.0;
    try {
        cholesky(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
    }
}

TEST(Cholesky, PerfectCorrelationIsClampedNotRejected) {
    Eigen::Matrix2d rho;
    rho << 1.0, 1.0, 1.0, 1.0;
    const Eigen::MatrixXd b = cholesky(rho).lower;
    EXPECT_EQ(b(1, 1), 0.0);
    EXPECT_LT((b * b.transpose() - rho).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cholesky, RoundTripOnRandomCorrelations) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 1 + trial % 6;
        // Normalized Gram matrices are valid correlations.
        const Eigen::MatrixXd a = testing_support::random_matrix(rng, n, n + 2);
        Eigen::MatrixXd gram = a * a.transpose();
        const Eigen::VectorXd d = gram.diagonal().cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd rho = d.asDiagonal() * gram * d.asDiagonal();
        const Eigen::MatrixXd b = cholesky(rho).lower;
        EXPECT_LT((b * b.transpose() - rho).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_GE(b.diagonal().minCoeff(), 0.0);
    }
}

TEST(SimulatePaths, GridAndInitialValues) {
    const auto params = ModelParams::uniform(2, 90.0, 0.03, 0.25, 0.3);
    const auto paths = simulate_paths(params, 17, 8, 2.0, SteppingScheme::exact_lognormal, 1);
    EXPECT_EQ(paths.n_paths(), 17u);
    EXPECT_EQ(paths.n_steps(), 8u);
    EXPECT_EQ(paths.n_assets(), 2u);
    ASSERT_EQ(paths.t_grid().size(), 9u);
    for (std::size_t j = 0; j + 1 < paths.t_grid().size(); ++j)
        EXPECT_NEAR(paths.t_grid()[j + 1] - paths.t_grid()[j], paths.dt(), 1e-15);
    EXPECT_DOUBLE_EQ(paths.t_grid().back(), 2.0);
    for (std::size_t p = 0; p < 17; ++p)
        for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(paths.value(p, 0, i), 90.0);
    const Eigen::MatrixXd s = paths.slice(3);
    EXPECT_EQ(s.rows(), 17);
    EXPECT_EQ(s(4, 1), paths.value(4, 3, 1));
}

TEST(SimulatePaths, ZeroVolIsDeterministicDrift) {
    Eigen::Matrix2d rho;
    rho << 1.0, 0.2, 0.2, 1.0;
    const ModelParams params({80.0, 120.0}, 0.05, {0.0, 0.0}, rho);
    for (auto scheme : {SteppingScheme::exact_lognormal}) {
        const auto paths = simulate_paths(params, 5, 10, 1.0, scheme, 3);
        for (std::size_t p = 0; p < 5; ++p)
            for (std::size_t j = 0; j <= 10; ++j)
                for (std::size_t i = 0; i < 2; ++i)
                    EXPECT_NEAR(paths.value(p, j, i), params.spots()[i] * std::exp(0.05 * paths.t_grid()[j]), 1e-10);
    }
}

TEST(SimulatePaths, ExactSchemeStaysPositive) {
    const auto params = ModelParams::single(100.0, 0.0, 3.0);
    const auto paths = simulate_paths(params, 2000, 4, 1.0, SteppingScheme::exact_lognormal, 8);
    for (double v : paths.raw()) EXPECT_GT(v, 0.0);
}

TEST(SimulatePaths, EulerKeepsNegativePrices) {
    // sigma sqrt(dt) = 3 makes negative arithmetic steps common.
    const auto params = ModelParams::single(100.0, 0.0, 3.0);
    const auto paths = simulate_paths(params, 2000, 1, 1.0, SteppingScheme::arithmetic_euler, 8);
    std::size_t negative = 0;
    for (std::size_t p = 0; p < paths.n_paths(); ++p) negative += paths.value(p, 1, 0) < 0.0;
    EXPECT_GT(negative, 0u);
}

TEST(SimulatePaths, RejectsBadArguments) {
    const auto params = ModelParams::single(100.0, 0.0, 0.2);
    EXPECT_THROW(simulate_paths(params, 0, 4, 1.0, SteppingScheme::exact_lognormal, 1), Error);
    EXPECT_THROW(simulate_paths(params, 4, 0, 1.0, SteppingScheme::exact_lognormal, 1), Error);
    EXPECT_THROW(simulate_terminal(params, 0, 1.0, 1), Error);
}

TEST(SimulatePaths, IndependentOfThreadCount) {
    const auto saved = worker_threads();
    const auto params = ModelParams::uniform(3, 100.0, 0.04, 0.3, 0.4);
    set_worker_threads(1);
    const auto a = simulate_paths(params, 3000, 12, 1.0, SteppingScheme::arithmetic_euler, 77);
    set_worker_threads(8);
    const auto b = simulate_paths(params, 3000, 12, 1.0, SteppingScheme::arithmetic_euler, 77);
    set_worker_threads(saved);
    EXPECT_EQ(a.raw(), b.raw());
}

TEST(SimulatePaths, PathPrefixDoesNotDependOnPathCount) {
    const auto params = ModelParams::single(100.0, 0.04, 0.2);
    const auto small = simulate_paths(params, 10, 5, 1.0, SteppingScheme::exact_lognormal, 5);
    const auto big = simulate_paths(params, 100, 5, 1.0, SteppingScheme::exact_lognormal, 5);
    for (std::size_t p = 0; p < 10; ++p)
        for (std::size_t j = 0; j <= 5; ++j) EXPECT_EQ(small.value(p, j, 0), big.value(p, j, 0));
}

namespace {
void expect_martingale(const ModelParams& params, SteppingScheme scheme, std::size_t steps) {
    const double t = 1.0;
    const auto paths = simulate_paths(params, 100'000, steps, t, scheme, 31);
    const double df = std::exp(-params.rate() * t);
    for (std::size_t i = 0; i < params.n_assets(); ++i) {
        double mean = 0.0, sq = 0.0;
        for (std::size_t p = 0; p < paths.n_paths(); ++p) {
            const double x = df * paths.value(p, steps, i);
            mean += x;
            sq += x * x;
        }
        const double n = static_cast<double>(paths.n_paths());
        mean /= n;
        const double se = std::sqrt((sq / n - mean * mean) * n / (n - 1.0) / n);
        EXPECT_LT(std::abs(mean - params.spots()[i]), 4.0 * se) << "asset " << i << " scheme " << to_string(scheme);
    }
}
}  // namespace

TEST(SimulatePaths, DiscountedTerminalIsMartingale) {
    expect_martingale(ModelParams::single(100.0, 0.04, 0.2), SteppingScheme::exact_lognormal, 10);
    expect_martingale(ModelParams::single(100.0, 0.04, 0.2), SteppingScheme::arithmetic_euler, 10);
    expect_martingale(ModelParams::uniform(3, 100.0, 0.04, 0.3, 0.5), SteppingScheme::arithmetic_euler, 5);
}

TEST(SimulatePaths, LogReturnCorrelationMatchesRho) {
    const auto params = ModelParams::uniform(2, 100.0, 0.04, 0.2, 0.5);
    const auto paths = simulate_paths(params, 100'000, 2, 1.0, SteppingScheme::exact_lognormal, 4);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    double n = 0;
    for (std::size_t p = 0; p < paths.n_paths(); ++p)
        for (std::size_t j = 1; j <= 2; ++j) {
            const double x = std::log(paths.value(p, j, 0) / paths.value(p, j - 1, 0));
            const double y = std::log(paths.value(p, j, 1) / paths.value(p, j - 1, 1));
            sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y, n += 1;
        }
    const double corr = (sxy / n - sx / n * sy / n) /
                        std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
    EXPECT_GE(corr, 0.49);
    EXPECT_LE(corr, 0.51);
}

TEST(SimulateTerminal, MatchesOneStepExactPathsBitwise) {
    const auto params = ModelParams::uniform(2, 100.0, 0.04, 0.3, -0.3);
    const Eigen::MatrixXd terminal = simulate_terminal(params, 500, 1.5, 12);
    const auto paths = simulate_paths(params, 500, 1, 1.5, SteppingScheme::exact_lognormal, 12);
    ASSERT_EQ(terminal.rows(), 500);
    ASSERT_EQ(terminal.cols(), 2);
    for (std::size_t p = 0; p < 500; ++p)
        for (std::size_t i = 0; i < 2; ++i)
            EXPECT_EQ(terminal(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)), paths.value(p, 1, i));
}

TEST(SimulateTerminal, ZeroVolAndMartingale) {
    const Eigen::MatrixXd flat = simulate_terminal(ModelParams::single(100.0, 0.04, 0.0), 10, 2.0, 1);
    for (Eigen::Index p = 0; p < 10; ++p) EXPECT_NEAR(flat(p, 0), 100.0 * std::exp(0.08), 1e-10);

    const Eigen::MatrixXd t = simulate_terminal(ModelParams::single(100.0, 0.04, 0.2), 100'000, 1.0, 9);
    const Eigen::VectorXd x = std::exp(-0.04) * t.col(0);
    const double mean = x.mean();
    const double se = std::sqrt((x.array() - mean).square().sum() / (x.size() - 1.0) / x.size());
    EXPECT_LT(std::abs(mean - 100.0), 4.0 * se);
}

TEST(WritePathsCsv, HeaderAndRowCount) {
    const auto paths = simulate_paths(ModelParams::uniform(2, 100.0, 0.0, 0.2, 0.0), 3, 2, 1.0,
                                      SteppingScheme::exact_lognormal, 1);
    std::ostringstream out;
    write_paths_csv(out, paths);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "path,step,asset,time,price");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 3u * 3u * 2u);
}
