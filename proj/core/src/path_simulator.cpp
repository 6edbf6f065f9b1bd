#include "mlsm/path_simulator.hpp"

#include "mlsm/error.hpp"
#include "mlsm/format.hpp"
#include "mlsm/parallel.hpp"
#include "mlsm/rng.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace mlsm {

CholeskyFactor cholesky(const Eigen::MatrixXd& correlation) {
    const auto n = correlation.rows();
    if (correlation.cols() != n) fail(ErrorCode::DimensionMismatch, "correlation must be square");
    constexpr double kPivotTolerance = 1e-12;

    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = correlation(j, j);
        for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
        if (pivot < -kPivotTolerance) {
            std::ostringstream msg;
            msg << "correlation matrix is not positive semi-definite (pivot " << pivot << " at column " << j << ")";
            fail(ErrorCode::NotPositiveDefinite, msg.str());
        }
        if (pivot < 0.0) pivot = 0.0;
        const double diag = std::sqrt(pivot);
        lower(j, j) = diag;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = correlation(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            if (diag > 0.0) {
                lower(i, j) = s / diag;
            } else if (std::abs(s) > kPivotTolerance) {
                fail(ErrorCode::NotPositiveDefinite, "correlation matrix is not positive semi-definite");
            }
        }
    }
    return {lower};
}

std::string to_string(SteppingScheme scheme) {
    return scheme == SteppingScheme::exact_lognormal ? "exact_lognormal" : "arithmetic_euler";
}

PathSet::PathSet(std::size_t n_paths, std::size_t n_steps, std::size_t n_assets, double dt, std::uint64_t seed,
                 SteppingScheme scheme)
    : n_paths_(n_paths), n_steps_(n_steps), n_assets_(n_assets), dt_(dt), seed_(seed), scheme_(scheme),
      t_grid_(n_steps + 1), values_(n_paths * (n_steps + 1) * n_assets) {
    for (std::size_t j = 0; j <= n_steps; ++j) t_grid_[j] = static_cast<double>(j) * dt;
}

Eigen::MatrixXd PathSet::slice(std::size_t step) const {
    Eigen::MatrixXd out(n_paths_, n_assets_);
    for (std::size_t p = 0; p < n_paths_; ++p)
        for (std::size_t i = 0; i < n_assets_; ++i) out(p, i) = value(p, step, i);
    return out;
}

namespace {

// Advances one path over n_steps steps of size dt, writing every node
// (including the initial one) through `emit(step, asset, price)`.
template <class Emit>
void evolve_path(const ModelParams& params, std::size_t n_steps, double dt, SteppingScheme scheme,
                 std::uint64_t path_seed, Emit&& emit) {
    const auto n = params.n_assets();
    const auto& B = params.cholesky_factor();
    const auto& vols = params.vols();
    const double r = params.rate();
    const double sqrt_dt = std::sqrt(dt);

    NormalStream normals(path_seed);
    std::vector<double> state(params.spots());
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) emit(0, i, state[i]);

    for (std::size_t step = 1; step <= n_steps; ++step) {
        for (auto& zi : z) zi = normals.next();
        for (std::size_t i = 0; i < n; ++i) {
            double w = 0.0;
            for (std::size_t k = 0; k <= i; ++k) w += B(i, k) * z[k];
            if (scheme == SteppingScheme::exact_lognormal) {
                state[i] *= std::exp((r - 0.5 * vols[i] * vols[i]) * dt + vols[i] * sqrt_dt * w);
            } else {
                state[i] *= 1.0 + r * dt + vols[i] * sqrt_dt * w;
            }
            emit(step, i, state[i]);
        }
    }
}

void check_counts(std::size_t n_paths, double maturity) {
    if (n_paths < 1) fail(ErrorCode::InvalidArgument, "n_paths must be >= 1");
    if (!(maturity > 0.0)) fail(ErrorCode::InvalidArgument, "maturity must be > 0");
}

}  // namespace

PathSet simulate_paths(const ModelParams& params, std::size_t n_paths, std::size_t n_steps, double maturity,
                       SteppingScheme scheme, std::uint64_t seed) {
    check_counts(n_paths, maturity);
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be >= 1");

    const double dt = maturity / static_cast<double>(n_steps);
    PathSet paths(n_paths, n_steps, params.n_assets(), dt, seed, scheme);
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            evolve_path(params, n_steps, dt, scheme, substream_seed(seed, p),
                        [&](std::size_t step, std::size_t asset, double price) { paths.value(p, step, asset) = price; });
        }
    });
    return paths;
}

Eigen::MatrixXd simulate_terminal(const ModelParams& params, std::size_t n_paths, double maturity,
                                  std::uint64_t seed) {
    check_counts(n_paths, maturity);
    Eigen::MatrixXd out(n_paths, params.n_assets());
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            evolve_path(params, 1, maturity, SteppingScheme::exact_lognormal, substream_seed(seed, p),
                        [&](std::size_t step, std::size_t asset, double price) {
                            if (step == 1) out(p, asset) = price;
                        });
        }
    });
    return out;
}

void write_paths_csv(std::ostream& out, const PathSet& paths) {
    out << "path,step,asset,time,price\n";
    for (std::size_t p = 0; p < paths.n_paths(); ++p)
        for (std::size_t j = 0; j <= paths.n_steps(); ++j)
            for (std::size_t i = 0; i < paths.n_assets(); ++i)
                out << p << ',' << j << ',' << i << ',' << format_number(paths.t_grid()[j]) << ','
                    << format_number(paths.value(p, j, i)) << '\n';
}

}  // namespace mlsm
