#pragma once

#include "mctspo/env.hpp"
#include "mctspo/genome.hpp"
#include "mctspo/rng.hpp"
#include "mctspo/run_result.hpp"
#include "mctspo/safe_mutation.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mctspo {

struct GAConfig {
    std::size_t population_size = 100;
    std::size_t truncation_size = 20;
    std::size_t elite_count = 3;
    std::uint64_t generations = 500;
    DivergenceBudget budget;

    void validate() const;
};

struct Individual {
    Genome genome;
    ParameterVector params;
    double fitness = 0.0;
    bool reached_goal = false;
    bool evaluated = false;
    /// The evaluation rollout; parents need it to size their mutations.
    Trajectory trajectory;
};

/// Truncation selection with elitism. The returned population starts with the
/// elite_count best individuals unchanged (still evaluated); every other
/// member is a uniformly chosen top-truncation_size parent plus one safe
/// mutation and is not yet evaluated.
std::vector<Individual> evolve_generation(std::span<const Individual> population,
                                          const GAConfig& config,
                                          SplitMix64& rng);

/// Rolls out the individual's policy and stores fitness and trajectory.
void evaluate(Individual& individual, Environment& env);

RunResult run_ga(Environment& env,
                 const NetworkShape& shape,
                 const GAConfig& config,
                 std::uint64_t master_seed,
                 bool record_wall_time = false);

} // namespace mctspo
