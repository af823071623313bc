#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mctspo {

// Every random quantity in the library (weight initialization, mutation
// directions, seed draws, parent sampling) comes from SplitMix64 with the
// published constants below. Normals use the Marsaglia polar method on the
// top 53 bits of each draw. Nothing here touches the <random> distributions,
// whose output is implementation-defined, so seed chains replay identically
// under any standard library.

inline constexpr std::uint64_t kSplitMixIncrement = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a user seed and a domain tag, so
/// that e.g. the initialization stream and the direction stream of the same
/// seed do not coincide.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t domain) noexcept
{
    return splitmix_finalize(seed ^ splitmix_finalize(domain * kSplitMixIncrement + 1));
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return next(); }

    result_type next() noexcept
    {
        state_ += kSplitMixIncrement;
        return splitmix_finalize(state_);
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, bound). Rejection sampling, unbiased.
    std::uint64_t bounded(std::uint64_t bound);

    /// Standard normal draw.
    double normal();

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// n independent standard normal draws from a fresh stream.
std::vector<double> standard_normal_sample(std::uint64_t stream_seed, std::size_t n);

} // namespace mctspo
