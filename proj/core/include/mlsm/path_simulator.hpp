#pragma once

#include "mlsm/market_model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mlsm {

struct CholeskyFactor {
    Eigen::MatrixXd lower;  // B with B * B^T == correlation
};

/// Lower-triangular factor of a correlation matrix. Pivots in [-1e-12, 0] are
/// clamped to zero so rank-deficient (e.g. perfectly correlated) inputs are
/// accepted; a pivot below -1e-12 throws NotPositiveDefinite.
CholeskyFactor cholesky(const Eigen::MatrixXd& correlation);

enum class SteppingScheme {
    // S(t+dt) = S(t) * (1 + r dt + sigma sqrt(dt) * (B Z)); may go negative.
    arithmetic_euler,
    // S(t+dt) = S(t) * exp((r - sigma^2/2) dt + sigma sqrt(dt) * (B Z)).
    exact_lognormal,
};

std::string to_string(SteppingScheme scheme);

/// Simulated prices on a uniform mesh, stored path-major:
/// value(p, j, i) is asset i on path p at time t_grid[j].
class PathSet {
public:
    PathSet(std::size_t n_paths, std::size_t n_steps, std::size_t n_assets, double dt, std::uint64_t seed,
            SteppingScheme scheme);

    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_assets() const noexcept { return n_assets_; }
    double dt() const noexcept { return dt_; }
    std::uint64_t seed() const noexcept { return seed_; }
    SteppingScheme scheme() const noexcept { return scheme_; }
    const std::vector<double>& t_grid() const noexcept { return t_grid_; }

    double value(std::size_t path, std::size_t step, std::size_t asset) const noexcept {
        return values_[(path * (n_steps_ + 1) + step) * n_assets_ + asset];
    }
    double& value(std::size_t path, std::size_t step, std::size_t asset) noexcept {
        return values_[(path * (n_steps_ + 1) + step) * n_assets_ + asset];
    }
    /// Cross-section at one time index: n_paths x n_assets.
    Eigen::MatrixXd slice(std::size_t step) const;

    const std::vector<double>& raw() const noexcept { return values_; }

private:
    std::size_t n_paths_;
    std::size_t n_steps_;
    std::size_t n_assets_;
    double dt_;
    std::uint64_t seed_;
    SteppingScheme scheme_;
    std::vector<double> t_grid_;
    std::vector<double> values_;
};

/// Path p draws its normals from NormalStream(substream_seed(seed, p)); the
/// result does not depend on worker_threads().
PathSet simulate_paths(const ModelParams& params, std::size_t n_paths, std::size_t n_steps, double maturity,
                       SteppingScheme scheme, std::uint64_t seed);

/// Exact one-step lognormal draw of S(T); row p is bitwise equal to the
/// terminal slice of simulate_paths(..., n_steps = 1, exact_lognormal, seed).
Eigen::MatrixXd simulate_terminal(const ModelParams& params, std::size_t n_paths, double maturity,
                                  std::uint64_t seed);

/// Debug dump with header `path,step,asset,time,price`.
void write_paths_csv(std::ostream& out, const PathSet& paths);

}  // namespace mlsm
