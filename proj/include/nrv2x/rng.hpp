#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace nrv2x {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text,
                                std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept
{
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform draw on [0, 1) from the top 53 bits; independent of the
/// standard library's distribution implementations.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer on [lo, hi] (inclusive).
inline int uniform_int(Rng& rng, int lo, int hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(uniform01(rng) * static_cast<double>(span));
}

/// Standard normal draw (polar Box-Muller, no cached spare).
inline double standard_normal(Rng& rng)
{
    for (;;) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

/// Independent named substreams for one replication.
struct RngStreams
{
    Rng mobility;
    Rng shadowing;
    Rng sps;
    Rng decode;

    static Rng stream(std::uint64_t seed, std::uint64_t replication, std::string_view name)
    {
        return Rng{derive_seed(derive_seed(seed, replication), fnv1a64(name))};
    }

    static RngStreams make(std::uint64_t seed, std::uint64_t replication)
    {
        return RngStreams{stream(seed, replication, "mobility"),
                          stream(seed, replication, "shadowing"),
                          stream(seed, replication, "sps"),
                          stream(seed, replication, "decode")};
    }
};

} // namespace nrv2x
