#pragma once

// Reproducible random number generation.
//
// All randomness in the library flows through xoshiro256** seeded by
// splitmix64 expansion of a single 64-bit seed. Integer draws use Lemire's
// multiply-shift rejection method rather than std::uniform_int_distribution,
// whose algorithm is implementation-defined, so a given seed yields the same
// draws on every platform and standard library.

#include <array>
#include <cstdint>
#include <limits>

namespace wormald {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

/// splitmix64 output finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the stream with index `index` under `master`:
/// mix64(master XOR golden_gamma * (index + 1)).
///
/// For a fixed master the map index -> seed is injective (odd multiplier,
/// XOR and mix64 are all bijections), so distinct runs never share a seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(master ^ (golden_gamma * (index + 1)));
}

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t operator()() noexcept
    {
        state_ += golden_gamma;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256ss {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256ss(std::uint64_t seed) noexcept : s_{}
    {
        SplitMix64 expand(seed);
        for (auto& word : s_)
            word = expand();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_;
};

/// Uniform integer in [0, bound). `bound` must be positive.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound)
{
    __extension__ typedef unsigned __int128 u128;
    u128 product = static_cast<u128>(rng()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            product = static_cast<u128>(rng()) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

/// Uniform double in the open interval (0, 1).
template <class Rng>
double uniform_open01(Rng& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace wormald
