#include "mctspo/policy_net.hpp"

#include "mctspo/errors.hpp"
#include "mctspo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mctspo {

namespace {

constexpr std::uint64_t kInitDomain = 0x696e6974; // "init"

bool all_finite(std::span<const double> xs)
{
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void check_observation(const NetworkShape& shape, std::span<const double> observation)
{
    if (observation.size() != shape.input_dim) {
        throw ContractViolation("observation has " + std::to_string(observation.size())
                                + " entries, network expects " + std::to_string(shape.input_dim));
    }
    require(all_finite(observation), "observation contains non-finite values");
}

} // namespace

std::size_t NetworkShape::fan_in(std::size_t layer) const
{
    require(layer < layer_count(), "NetworkShape::fan_in: layer out of range");
    return layer == 0 ? input_dim : hidden_dims[layer - 1];
}

std::size_t NetworkShape::fan_out(std::size_t layer) const
{
    require(layer < layer_count(), "NetworkShape::fan_out: layer out of range");
    return layer + 1 == layer_count() ? output_dim : hidden_dims[layer];
}

std::size_t NetworkShape::parameter_count() const
{
    std::size_t count = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        count += fan_in(l) * fan_out(l) + fan_out(l);
    }
    return count;
}

double NetworkShape::output_bound(std::size_t k) const
{
    return output_bounds.empty() ? 1.0 : output_bounds.at(k);
}

void NetworkShape::validate() const
{
    require(input_dim > 0, "network input_dim must be positive");
    require(output_dim > 0, "network output_dim must be positive");
    for (auto h : hidden_dims) {
        require(h > 0, "hidden layer sizes must be positive");
    }
    require(output_bounds.empty() || output_bounds.size() == output_dim,
            "output_bounds must be empty or have one entry per output");
    for (double b : output_bounds) {
        require(std::isfinite(b) && b > 0.0, "output bounds must be positive and finite");
    }
}

ParameterVector::ParameterVector(const NetworkShape& shape, std::vector<double> values)
    : ParameterVector(std::make_shared<const NetworkShape>(shape), std::move(values))
{
}

ParameterVector::ParameterVector(std::shared_ptr<const NetworkShape> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values))
{
    shape_->validate();
    if (values_.size() != shape_->parameter_count()) {
        throw ContractViolation("parameter vector has " + std::to_string(values_.size())
                                + " entries, shape needs " + std::to_string(shape_->parameter_count()));
    }
    require(all_finite(values_), "parameter vector contains non-finite values");
}

ParameterVector ParameterVector::zeros(const NetworkShape& shape)
{
    return ParameterVector(shape, std::vector<double>(shape.parameter_count(), 0.0));
}

ParameterVector ParameterVector::with_values(std::vector<double> values) const
{
    return ParameterVector(shape_, std::move(values));
}

bool ParameterVector::operator==(const ParameterVector& other) const
{
    return *shape_ == *other.shape_ && values_ == other.values_;
}

ParameterVector init_from_seed(const NetworkShape& shape, std::uint64_t seed)
{
    shape.validate();
    SplitMix64 rng(derive_stream(seed, kInitDomain));
    std::vector<double> values;
    values.reserve(shape.parameter_count());
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const std::size_t in = shape.fan_in(l);
        const std::size_t out = shape.fan_out(l);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < in * out; ++i) {
            values.push_back(rng.normal() * scale);
        }
        values.insert(values.end(), out, 0.0);
    }
    return ParameterVector(shape, std::move(values));
}

std::vector<double> forward(const ParameterVector& params, std::span<const double> observation)
{
    const NetworkShape& shape = params.shape();
    check_observation(shape, observation);
    const bool squash = shape.activation == Activation::tanh;

    std::vector<double> h(observation.begin(), observation.end());
    std::vector<double> z;
    const double* p = params.values().data();
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const std::size_t in = shape.fan_in(l);
        const std::size_t out = shape.fan_out(l);
        const double* w = p;
        const double* b = p + in * out;
        z.assign(out, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            double acc = b[r];
            const double* row = w + r * in;
            for (std::size_t c = 0; c < in; ++c) {
                acc += row[c] * h[c];
            }
            z[r] = squash ? std::tanh(acc) : acc;
        }
        p = b + out;
        h.swap(z);
    }
    if (squash) {
        for (std::size_t k = 0; k < h.size(); ++k) {
            h[k] *= shape.output_bound(k);
        }
    }
    return h;
}

std::vector<double> jvp_outputs(const ParameterVector& params,
                                std::span<const double> observation,
                                std::span<const double> direction)
{
    const NetworkShape& shape = params.shape();
    check_observation(shape, observation);
    if (direction.size() != params.size()) {
        throw ContractViolation("direction has " + std::to_string(direction.size())
                                + " entries, parameter vector has " + std::to_string(params.size()));
    }
    const bool squash = shape.activation == Activation::tanh;

    // Tangent of the input is zero; tangents enter through weights and biases.
    std::vector<double> h(observation.begin(), observation.end());
    std::vector<double> dh(h.size(), 0.0);
    std::vector<double> z;
    std::vector<double> dz;
    const double* p = params.values().data();
    const double* d = direction.data();
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const std::size_t in = shape.fan_in(l);
        const std::size_t out = shape.fan_out(l);
        const double* w = p;
        const double* dw = d;
        const double* b = p + in * out;
        const double* db = d + in * out;
        z.assign(out, 0.0);
        dz.assign(out, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            double acc = b[r];
            double dacc = db[r];
            const double* row = w + r * in;
            const double* drow = dw + r * in;
            for (std::size_t c = 0; c < in; ++c) {
                acc += row[c] * h[c];
                dacc += drow[c] * h[c] + row[c] * dh[c];
            }
            if (squash) {
                const double t = std::tanh(acc);
                z[r] = t;
                dz[r] = (1.0 - t * t) * dacc;
            } else {
                z[r] = acc;
                dz[r] = dacc;
            }
        }
        p = b + out;
        d = db + out;
        h.swap(z);
        dh.swap(dz);
    }
    if (squash) {
        for (std::size_t k = 0; k < dh.size(); ++k) {
            dh[k] *= shape.output_bound(k);
        }
    }
    return dh;
}

} // namespace mctspo
