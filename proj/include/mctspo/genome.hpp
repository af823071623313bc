#pragma once

#include "mctspo/policy_net.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mctspo {

enum class ActionKind {
    /// All-zero parameters. Only the search tree's dummy root uses it.
    zero_init,
    /// init_from_seed(shape, seed).
    seeded_init,
    /// params + magnitude * direction_from_seed(seed).
    mutation,
};

struct MutationAction {
    std::uint64_t seed = 0;
    double magnitude = 0.0;
    ActionKind kind = ActionKind::mutation;

    static MutationAction init(std::uint64_t seed) { return {seed, 0.0, ActionKind::seeded_init}; }
    static MutationAction zero() { return {0, 0.0, ActionKind::zero_init}; }
    static MutationAction mutate(std::uint64_t seed, double magnitude)
    {
        return {seed, magnitude, ActionKind::mutation};
    }

    bool is_init() const noexcept { return kind != ActionKind::mutation; }

    bool operator==(const MutationAction&) const = default;
};

/// Seed-chain encoding of a policy: one initialization action followed by
/// mutations, replayed in order.
struct Genome {
    NetworkShape shape;
    std::vector<MutationAction> actions;

    /// Copy with one more mutation appended.
    Genome extended(const MutationAction& action) const;

    /// Throws ContractViolation unless actions[0] is the only init action and
    /// every magnitude is finite and non-negative.
    void validate() const;

    bool operator==(const Genome&) const = default;
};

/// Standard normal draws for a direction seed, before normalization.
std::vector<double> raw_direction(std::uint64_t seed, std::size_t dim);

/// raw_direction scaled to unit Euclidean length.
std::vector<double> direction_from_seed(std::uint64_t seed, std::size_t dim);

/// values[i] += magnitude * direction[i], in place. `action` must be a mutation.
void apply_mutation_inplace(std::span<double> values, const MutationAction& action);

ParameterVector apply_mutation(const ParameterVector& params, const MutationAction& action);

/// Parameters produced by an initialization action.
ParameterVector initial_parameters(const NetworkShape& shape, const MutationAction& init);

ParameterVector materialize(const Genome& genome);

inline constexpr int kGenomeFormatVersion = 1;

nlohmann::json shape_to_json(const NetworkShape& shape);
NetworkShape shape_from_json(const nlohmann::json& j);

nlohmann::json genome_to_json(const Genome& genome);
/// Throws ConfigError on a malformed document.
Genome genome_from_json(const nlohmann::json& j);

void save_genome(const Genome& genome, const std::filesystem::path& path);
/// Throws ConfigError when the file is missing, does not parse, or violates
/// the genome invariants.
Genome load_genome(const std::filesystem::path& path);

} // namespace mctspo
