#include "mctspo/rng.hpp"

#include "mctspo/errors.hpp"

#include <cmath>

namespace mctspo {

std::uint64_t SplitMix64::bounded(std::uint64_t bound)
{
    require(bound > 0, "SplitMix64::bounded: bound must be positive");
    // Largest multiple of bound that fits; draws above it are rejected.
    const std::uint64_t limit = max() - (max() % bound + 1) % bound;
    std::uint64_t draw = next();
    while (draw > limit) {
        draw = next();
    }
    return draw % bound;
}

double SplitMix64::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

std::vector<double> standard_normal_sample(std::uint64_t stream_seed, std::size_t n)
{
    SplitMix64 rng(stream_seed);
    std::vector<double> out(n);
    for (auto& x : out) {
        x = rng.normal();
    }
    return out;
}

} // namespace mctspo
