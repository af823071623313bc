#pragma once

#include "mctspo/env.hpp"
#include "mctspo/policy_net.hpp"
#include "mctspo/rng.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace test_support {

inline std::vector<double> normal_vector(mctspo::SplitMix64& rng, std::size_t n, double scale = 1.0)
{
    std::vector<double> v(n);
    for (auto& x : v) {
        x = scale * rng.normal();
    }
    return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

inline double norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

/// Reference forward pass written out layer by layer, kept separate from the
/// library's implementation.
inline std::vector<double> naive_forward(const mctspo::NetworkShape& shape,
                                         std::span<const double> theta,
                                         std::vector<double> h)
{
    std::size_t offset = 0;
    for (std::size_t layer = 0; layer < shape.layer_count(); ++layer) {
        const std::size_t in = h.size();
        const std::size_t out = layer + 1 < shape.layer_count() ? shape.hidden_dims[layer] : shape.output_dim;
        std::vector<double> next(out);
        for (std::size_t r = 0; r < out; ++r) {
            double z = theta[offset + out * in + r];
            for (std::size_t c = 0; c < in; ++c) {
                z += theta[offset + r * in + c] * h[c];
            }
            next[r] = z;
        }
        offset += out * in + out;
        if (shape.activation == mctspo::Activation::tanh) {
            for (std::size_t r = 0; r < out; ++r) {
                next[r] = std::tanh(next[r]);
                if (layer + 1 == shape.layer_count()) {
                    next[r] *= shape.output_bound(r);
                }
            }
        }
        h = std::move(next);
    }
    return h;
}

/// Two-dimensional toy task for search tests: the state is the running sum of
/// actions, and the goal is reached when the first coordinate exceeds 0.5.
class StubDynamics final : public mctspo::Dynamics {
public:
    explicit StubDynamics(int horizon = 5) : horizon_(horizon) {}

    std::size_t observation_dim() const override { return 2; }
    std::size_t action_dim() const override { return 1; }
    double action_bound(std::size_t) const override { return 1.0; }
    int horizon() const override { return horizon_; }
    double control_penalty() const override { return 0.01; }

    mctspo::TaskState reset() const override { return {{0.1, -0.2}, 0, false}; }
    std::vector<double> observe(const mctspo::TaskState& s) const override { return s.values; }
    std::vector<double> advance(std::span<const double> s, std::span<const double> a) const override
    {
        return {s[0] + 0.1 * a[0], s[1] - 0.05 * a[0]};
    }
    bool goal_reached(std::span<const double> s) const override { return s[0] >= 0.5; }

private:
    int horizon_;
};

} // namespace test_support
