#include "mctspo/genome.hpp"

#include "mctspo/errors.hpp"
#include "mctspo/rng.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mctspo {

namespace {

constexpr std::uint64_t kDirectionDomain = 0x646972; // "dir"

std::string activation_name(Activation a)
{
    return a == Activation::tanh ? "tanh" : "linear";
}

} // namespace

Genome Genome::extended(const MutationAction& action) const
{
    require(action.kind == ActionKind::mutation, "Genome::extended: only mutations can be appended");
    Genome g = *this;
    g.actions.push_back(action);
    return g;
}

void Genome::validate() const
{
    shape.validate();
    require(!actions.empty(), "genome has no actions");
    require(actions.front().is_init(), "first genome action must be an initialization");
    for (std::size_t i = 1; i < actions.size(); ++i) {
        require(actions[i].kind == ActionKind::mutation, "only the first genome action may be an initialization");
        require(std::isfinite(actions[i].magnitude) && actions[i].magnitude >= 0.0,
                "mutation magnitudes must be finite and non-negative");
    }
}

std::vector<double> raw_direction(std::uint64_t seed, std::size_t dim)
{
    require(dim >= 1, "direction dimension must be positive");
    return standard_normal_sample(derive_stream(seed, kDirectionDomain), dim);
}

std::vector<double> direction_from_seed(std::uint64_t seed, std::size_t dim)
{
    std::vector<double> d = raw_direction(seed, dim);
    double sq = 0.0;
    for (double x : d) {
        sq += x * x;
    }
    const double norm = std::sqrt(sq);
    for (double& x : d) {
        x /= norm;
    }
    return d;
}

void apply_mutation_inplace(std::span<double> values, const MutationAction& action)
{
    require(action.kind == ActionKind::mutation, "apply_mutation: initialization actions cannot be applied");
    require(std::isfinite(action.magnitude) && action.magnitude >= 0.0,
            "apply_mutation: magnitude must be finite and non-negative");
    const std::vector<double> d = direction_from_seed(action.seed, values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] += action.magnitude * d[i];
    }
}

ParameterVector apply_mutation(const ParameterVector& params, const MutationAction& action)
{
    std::vector<double> values(params.values().begin(), params.values().end());
    apply_mutation_inplace(values, action);
    return params.with_values(std::move(values));
}

ParameterVector initial_parameters(const NetworkShape& shape, const MutationAction& init)
{
    switch (init.kind) {
    case ActionKind::zero_init:
        return ParameterVector::zeros(shape);
    case ActionKind::seeded_init:
        return init_from_seed(shape, init.seed);
    case ActionKind::mutation:
        break;
    }
    throw ContractViolation("initial_parameters: action is a mutation");
}

ParameterVector materialize(const Genome& genome)
{
    genome.validate();
    const ParameterVector start = initial_parameters(genome.shape, genome.actions.front());
    std::vector<double> values(start.values().begin(), start.values().end());
    for (std::size_t i = 1; i < genome.actions.size(); ++i) {
        apply_mutation_inplace(values, genome.actions[i]);
    }
    return start.with_values(std::move(values));
}

nlohmann::json shape_to_json(const NetworkShape& shape)
{
    nlohmann::json j;
    j["input_dim"] = shape.input_dim;
    j["hidden_dims"] = shape.hidden_dims;
    j["output_dim"] = shape.output_dim;
    j["output_bounds"] = shape.output_bounds;
    j["activation"] = activation_name(shape.activation);
    return j;
}

NetworkShape shape_from_json(const nlohmann::json& j)
{
    try {
        NetworkShape shape;
        shape.input_dim = j.at("input_dim").get<std::size_t>();
        shape.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
        shape.output_dim = j.at("output_dim").get<std::size_t>();
        if (j.contains("output_bounds")) {
            shape.output_bounds = j.at("output_bounds").get<std::vector<double>>();
        }
        const std::string act = j.value("activation", std::string("tanh"));
        if (act == "tanh") {
            shape.activation = Activation::tanh;
        } else if (act == "linear") {
            shape.activation = Activation::linear;
        } else {
            throw ConfigError("unknown activation '" + act + "'");
        }
        shape.validate();
        return shape;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid network shape: ") + e.what());
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("invalid network shape: ") + e.what());
    }
}

nlohmann::json genome_to_json(const Genome& genome)
{
    genome.validate();
    nlohmann::json j;
    j["format_version"] = kGenomeFormatVersion;
    j["shape"] = shape_to_json(genome.shape);
    j["init"] = genome.actions.front().kind == ActionKind::zero_init ? "zero" : "seeded";
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& a : genome.actions) {
        actions.push_back({{"seed", a.seed}, {"magnitude", a.magnitude}});
    }
    j["actions"] = std::move(actions);
    return j;
}

Genome genome_from_json(const nlohmann::json& j)
{
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kGenomeFormatVersion) {
            throw ConfigError("unsupported genome format_version " + std::to_string(version));
        }
        Genome g;
        g.shape = shape_from_json(j.at("shape"));
        const std::string init = j.value("init", std::string("seeded"));
        if (init != "seeded" && init != "zero") {
            throw ConfigError("unknown genome init kind '" + init + "'");
        }
        const auto& actions = j.at("actions");
        if (!actions.is_array() || actions.empty()) {
            throw ConfigError("genome 'actions' must be a non-empty array");
        }
        for (std::size_t i = 0; i < actions.size(); ++i) {
            const auto& a = actions[i];
            MutationAction action;
            action.seed = a.at("seed").get<std::uint64_t>();
            action.magnitude = a.at("magnitude").get<double>();
            if (i == 0) {
                action.kind = init == "zero" ? ActionKind::zero_init : ActionKind::seeded_init;
            }
            g.actions.push_back(action);
        }
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid genome document: ") + e.what());
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("invalid genome document: ") + e.what());
    }
}

void save_genome(const Genome& genome, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << genome_to_json(genome).dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

Genome load_genome(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open genome file '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("genome file '" + path.string() + "' does not parse: " + e.what());
    }
    return genome_from_json(j);
}

} // namespace mctspo
