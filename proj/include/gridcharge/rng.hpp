#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gridcharge::rng {

// Counter-based generator (splitmix64 finalizer). Every draw is a pure
// function of (seed, counter), so parallel loops produce the same stream
// as the serial reference regardless of thread count or schedule.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform draw in the open interval (0, 1) for a given (seed, counter).
inline double uniform01(std::uint64_t seed, std::uint64_t counter) noexcept {
    const std::uint64_t z = splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
    return static_cast<double>(z >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

/// Standard normal draw (Box-Muller) for a given (seed, counter).
inline double gaussian(std::uint64_t seed, std::uint64_t counter) noexcept {
    const double u1 = uniform01(seed, 2 * counter);
    const double u2 = uniform01(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Derives an independent stream seed, e.g. one per study cell.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(0xa0761d6478bd642fULL + stream));
}

} // namespace gridcharge::rng
