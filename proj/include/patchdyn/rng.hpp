#pragma once

#include <cstdint>
#include <random>

namespace patchdyn {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream keyed by (seed, unit, replica, coarse step). Streams are
/// assigned by key, not by thread, so results do not depend on scheduling.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t unit = 0,
                                   std::uint64_t replica = 0,
                                   std::uint64_t coarse_step = 0) {
    std::uint64_t s = splitmix64(seed ^ 0x7fb5d329728ea185ULL);
    s = splitmix64(s ^ unit);
    s = splitmix64(s ^ (replica << 20));
    s = splitmix64(s ^ (coarse_step << 40));
    return std::mt19937_64(s);
}

inline double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

/// Exact Poisson sample by inversion. Large means are split into chunks so the
/// sequential search never underflows.
inline long poisson_draw(double mean, std::mt19937_64& rng) {
    long total = 0;
    while (mean > 30.0) {
        double p = std::exp(-30.0);
        double u = uniform01(rng);
        long k = 0;
        double cdf = p;
        while (u > cdf && k < 1000) {
            ++k;
            p *= 30.0 / k;
            cdf += p;
        }
        total += k;
        mean -= 30.0;
    }
    double p = std::exp(-mean);
    double u = uniform01(rng);
    long k = 0;
    double cdf = p;
    while (u > cdf && k < 1000) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return total + k;
}

}  // namespace patchdyn
