#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace mlsm {

/// SplitMix64 finalizer. Used to derive statistically independent substream
/// seeds from (seed, index) pairs so that work can be partitioned across
/// threads without changing any drawn value.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; independent of the standard
/// library's distribution implementation.
std::size_t uniform_index(std::mt19937_64& engine, std::size_t n);

/// Standard normal variates by the Box–Muller transform on a 64-bit Mersenne
/// Twister. Each pair of uniforms (u1, u2) yields
///   sqrt(-2 ln(1 - u1)) * cos(2 pi u2), then sqrt(-2 ln(1 - u1)) * sin(2 pi u2).
/// The algorithm is fixed so seeded outputs are stable across platforms whose
/// libm agrees on log/cos/sin.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// `count` standard normals from the stream seeded by substream_seed(seed, 0).
std::vector<double> standard_normals(std::uint64_t seed, std::size_t count);

/// Fisher–Yates permutation of 0..n-1 driven by uniform_index.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace mlsm
