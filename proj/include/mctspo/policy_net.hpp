#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace mctspo {

enum class Activation {
    tanh,
    /// Identity hidden layers and no output squashing. Only used to build
    /// networks whose output divergence is exactly quadratic in the parameters.
    linear,
};

/// Layer sizes of a fully connected policy. Hidden layers use `activation`;
/// with tanh the output layer is squashed as bound_k * tanh(z_k).
struct NetworkShape {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t output_dim = 0;
    /// Per-output action bound. Empty means 1.0 for every output.
    std::vector<double> output_bounds;
    Activation activation = Activation::tanh;

    std::size_t layer_count() const noexcept { return hidden_dims.size() + 1; }
    std::size_t fan_in(std::size_t layer) const;
    std::size_t fan_out(std::size_t layer) const;
    std::size_t parameter_count() const;
    double output_bound(std::size_t k) const;

    /// Throws ContractViolation if any dimension is zero or a bound is not
    /// positive and finite.
    void validate() const;

    bool operator==(const NetworkShape&) const = default;
};

/// Flat parameter vector: for each layer, the weight matrix row-major
/// (fan_out rows of fan_in entries) followed by the fan_out biases.
class ParameterVector {
public:
    ParameterVector(const NetworkShape& shape, std::vector<double> values);

    static ParameterVector zeros(const NetworkShape& shape);

    const NetworkShape& shape() const noexcept { return *shape_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Same shape, new values. Shares the shape storage.
    ParameterVector with_values(std::vector<double> values) const;

    /// Bitwise equality of shape and values.
    bool operator==(const ParameterVector& other) const;

private:
    ParameterVector(std::shared_ptr<const NetworkShape> shape, std::vector<double> values);

    std::shared_ptr<const NetworkShape> shape_;
    std::vector<double> values_;
};

/// Weights ~ N(0, 1/fan_in), biases zero, drawn from the seed's
/// initialization stream.
ParameterVector init_from_seed(const NetworkShape& shape, std::uint64_t seed);

std::vector<double> forward(const ParameterVector& params, std::span<const double> observation);

/// Exact forward-mode product of the output Jacobian (with respect to the
/// parameters) and `direction`.
std::vector<double> jvp_outputs(const ParameterVector& params,
                                std::span<const double> observation,
                                std::span<const double> direction);

} // namespace mctspo
