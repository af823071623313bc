#include "mctspo/deepga.hpp"

#include "mctspo/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <spdlog/spdlog.h>

namespace mctspo {

namespace {

constexpr std::uint64_t kGaDomain = 0x64656570; // "deep"

} // namespace

void GAConfig::validate() const
{
    require(population_size > 0, "population size must be positive");
    require(truncation_size > 0, "truncation size must be positive");
    require(truncation_size <= population_size, "truncation size cannot exceed the population size");
    require(elite_count <= truncation_size, "elite count cannot exceed the truncation size");
    require(generations > 0, "generation count must be positive");
    budget.validate();
}

std::vector<Individual> evolve_generation(std::span<const Individual> population,
                                          const GAConfig& config,
                                          SplitMix64& rng)
{
    config.validate();
    require(!population.empty(), "evolve_generation: empty population");
    for (const auto& ind : population) {
        require(ind.evaluated, "evolve_generation: every individual must be evaluated");
    }

    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return population[a].fitness > population[b].fitness; });

    const std::size_t truncation = std::min(config.truncation_size, population.size());
    const std::size_t elites = std::min(config.elite_count, truncation);

    std::vector<Individual> next;
    next.reserve(config.population_size);
    for (std::size_t i = 0; i < elites; ++i) {
        next.push_back(population[order[i]]);
    }
    // A parent whose every drawn direction is degenerate is dropped from the
    // draw; the generation fails only when the whole truncation set is barren.
    std::vector<bool> barren(truncation, false);
    std::size_t barren_count = 0;
    while (next.size() < config.population_size) {
        const std::size_t pick = rng.bounded(truncation);
        if (barren[pick]) {
            continue;
        }
        const Individual& parent = population[order[pick]];
        try {
            const auto actions = get_candidate_actions(parent.params, parent.trajectory, 1, config.budget, rng);
            next.push_back(Individual{parent.genome.extended(actions.front()),
                                      apply_mutation(parent.params, actions.front()), 0.0, false, false, {}});
        } catch (const CandidateGenerationFailed&) {
            spdlog::debug("parent of rank {} admits no safe mutation", pick);
            barren[pick] = true;
            if (++barren_count == truncation) {
                throw CandidateGenerationFailed("no parent in the truncation set admits a safe mutation");
            }
        }
    }
    return next;
}

void evaluate(Individual& individual, Environment& env)
{
    individual.trajectory = rollout(env, individual.params);
    individual.fitness = individual.trajectory.total_return;
    individual.reached_goal = individual.trajectory.reached_goal;
    individual.evaluated = true;
}

RunResult run_ga(Environment& env,
                 const NetworkShape& shape,
                 const GAConfig& config,
                 std::uint64_t master_seed,
                 bool record_wall_time)
{
    config.validate();
    SplitMix64 rng(derive_stream(master_seed, kGaDomain));
    CurveRecorder curve(env.budget(), record_wall_time);
    RunResult result;
    result.best_return = -std::numeric_limits<double>::infinity();
    bool have_best = false;

    auto evaluate_all = [&](std::vector<Individual>& population) {
        for (auto& ind : population) {
            if (ind.evaluated) {
                continue;
            }
            evaluate(ind, env);
            if (ind.reached_goal && !result.first_goal_env_calls) {
                result.first_goal_env_calls = env.calls();
            }
            const bool improved = !have_best || ind.fitness > result.best_return;
            if (improved) {
                have_best = true;
                result.best_return = ind.fitness;
                result.best_genome = ind.genome;
                result.best_reached_goal = ind.reached_goal;
            }
            curve.record(env.calls(), result.best_return, improved);
        }
    };

    std::vector<Individual> population;
    population.reserve(config.population_size);
    for (std::size_t i = 0; i < config.population_size; ++i) {
        Genome g{shape, {MutationAction::init(rng.next())}};
        ParameterVector params = materialize(g);
        population.push_back(Individual{std::move(g), std::move(params), 0.0, false, false, {}});
    }

    try {
        evaluate_all(population);
        result.iterations = 1;
        for (std::uint64_t gen = 1; gen < config.generations; ++gen) {
            population = evolve_generation(population, config, rng);
            evaluate_all(population);
            result.iterations = gen + 1;
        }
    } catch (const BudgetExhausted&) {
        spdlog::debug("GA stopped by the environment budget after {} generations", result.iterations);
    } catch (const CandidateGenerationFailed& e) {
        spdlog::warn("GA stopped after {} generations: {}", result.iterations, e.what());
    }

    result.env_calls = env.calls();
    if (have_best) {
        curve.finish(env.calls(), result.best_return);
        result.curve = curve.take();
    } else {
        result.best_genome = Genome{shape, {MutationAction::zero()}};
    }
    return result;
}

} // namespace mctspo
