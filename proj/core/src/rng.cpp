#include "mlsm/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace mlsm {

std::size_t uniform_index(std::mt19937_64& engine, std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
    std::uint64_t x = engine();
    while (x >= limit) x = engine();
    return static_cast<std::size_t>(x % bound);
}

double NormalStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = uniform01(engine_);
    const double u2 = uniform01(engine_);
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::vector<double> standard_normals(std::uint64_t seed, std::size_t count) {
    NormalStream stream(substream_seed(seed, 0));
    std::vector<double> out(count);
    for (auto& z : out) z = stream.next();
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 engine(substream_seed(seed, 0x5eed));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = uniform_index(engine, i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace mlsm
