#include "mctspo/deepga.hpp"
#include "mctspo/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace mctspo;

namespace {

const NetworkShape kShape{2, {4}, 1};

std::shared_ptr<const Dynamics> stub()
{
    return std::make_shared<test_support::StubDynamics>(5);
}

std::vector<Individual> initial_population(std::size_t n, Environment& env)
{
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < n; ++i) {
        Genome g{kShape, {MutationAction::init(1000 + i)}};
        auto params = materialize(g);
        pop.push_back(Individual{std::move(g), std::move(params), 0.0, false, false, {}});
        evaluate(pop.back(), env);
    }
    return pop;
}

bool is_prefix_plus_one(const Genome& parent, const Genome& child)
{
    return child.actions.size() == parent.actions.size() + 1
           && std::equal(parent.actions.begin(), parent.actions.end(), child.actions.begin())
           && child.actions.back().kind == ActionKind::mutation;
}

} // namespace

TEST_CASE("truncation selection with elitism")
{
    Environment env(stub());
    const auto pop = initial_population(10, env);
    GAConfig cfg;
    cfg.population_size = 10;
    cfg.truncation_size = 3;
    cfg.elite_count = 1;

    std::vector<Individual> ranked(pop);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; });

    SplitMix64 rng(5);
    const auto next = evolve_generation(pop, cfg, rng);
    REQUIRE(next.size() == 10);
    CHECK(next.front().genome == ranked.front().genome);
    CHECK(next.front().evaluated);
    CHECK(next.front().fitness == ranked.front().fitness);

    for (std::size_t i = 1; i < next.size(); ++i) {
        const auto& child = next[i];
        CHECK_FALSE(child.evaluated);
        bool from_top = false;
        for (std::size_t r = 0; r < 3; ++r) {
            if (is_prefix_plus_one(ranked[r].genome, child.genome)) {
                from_top = true;
                CHECK(divergence(child.params, ranked[r].params, ranked[r].trajectory) <= cfg.budget.max_divergence);
            }
        }
        CHECK(from_top);
        CHECK(child.params == materialize(child.genome));
    }
}

TEST_CASE("evolution is reproducible from the generator state")
{
    Environment env(stub());
    const auto pop = initial_population(8, env);
    GAConfig cfg;
    cfg.population_size = 8;
    cfg.truncation_size = 4;
    cfg.elite_count = 2;
    SplitMix64 a(3);
    SplitMix64 b(3);
    const auto x = evolve_generation(pop, cfg, a);
    const auto y = evolve_generation(pop, cfg, b);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i].genome == y[i].genome);
    }
}

TEST_CASE("elite fitness never decreases")
{
    Environment env(EnvSpec::sparse_mountain_car());
    const NetworkShape shape{2, {8}, 1};
    std::vector<Individual> pop;
    for (std::uint64_t i = 0; i < 12; ++i) {
        Genome g{shape, {MutationAction::init(i)}};
        auto params = materialize(g);
        pop.push_back(Individual{std::move(g), std::move(params), 0.0, false, false, {}});
        evaluate(pop.back(), env);
    }
    GAConfig cfg;
    cfg.population_size = 12;
    cfg.truncation_size = 4;
    cfg.elite_count = 2;
    SplitMix64 rng(9);
    double previous = -1e300;
    for (int gen = 0; gen < 15; ++gen) {
        double best = -1e300;
        for (const auto& ind : pop) {
            best = std::max(best, ind.fitness);
        }
        CHECK(best >= previous);
        previous = best;
        pop = evolve_generation(pop, cfg, rng);
        for (auto& ind : pop) {
            if (!ind.evaluated) {
                evaluate(ind, env);
            }
        }
    }
}

TEST_CASE("a truncation set with no safe mutation ends the run")
{
    // Saturated parents: every direction is degenerate.
    Environment env(stub());
    const NetworkShape shape{2, {4}, 1};
    std::vector<Individual> pop;
    for (std::uint64_t i = 0; i < 4; ++i) {
        auto base = init_from_seed(shape, i);
        std::vector<double> big(base.values().begin(), base.values().end());
        for (auto& x : big) {
            x *= 1e6;
        }
        pop.push_back(Individual{Genome{shape, {MutationAction::init(i)}}, base.with_values(big), 0.0, false, false,
                                 {}});
        evaluate(pop.back(), env);
    }
    GAConfig cfg;
    cfg.population_size = 4;
    cfg.truncation_size = 2;
    cfg.elite_count = 1;
    SplitMix64 rng(2);
    CHECK_THROWS_AS(evolve_generation(pop, cfg, rng), CandidateGenerationFailed);
}

TEST_CASE("evolution requires evaluated individuals")
{
    Environment env(stub());
    auto pop = initial_population(4, env);
    pop[2].evaluated = false;
    GAConfig cfg;
    cfg.population_size = 4;
    cfg.truncation_size = 2;
    cfg.elite_count = 1;
    SplitMix64 rng(1);
    CHECK_THROWS_AS(evolve_generation(pop, cfg, rng), ContractViolation);
    CHECK_THROWS_AS(evolve_generation(std::span<const Individual>{}, cfg, rng), ContractViolation);
    (void)env;
}

TEST_CASE("a single generation returns the best initialization")
{
    Environment env(EnvSpec::sparse_mountain_car());
    GAConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 1;
    const auto r = run_ga(env, NetworkShape{2, {8}, 1}, cfg, 4);
    CHECK(r.iterations == 1);
    CHECK(r.best_genome.actions.size() == 1);
    CHECK(r.best_genome.actions.front().kind == ActionKind::seeded_init);
    CHECK(env.calls() == 2000);

    Environment replay_env(EnvSpec::sparse_mountain_car());
    CHECK(rollout(replay_env, materialize(r.best_genome)).total_return == r.best_return);
}

TEST_CASE("ga runs are reproducible and stop gracefully at the budget")
{
    auto run = [](std::uint64_t seed) {
        Environment env(stub(), 3001);
        GAConfig cfg;
        cfg.population_size = 30;
        cfg.truncation_size = 6;
        cfg.elite_count = 2;
        return run_ga(env, kShape, cfg, seed);
    };
    const auto a = run(2);
    const auto b = run(2);
    CHECK(a.curve == b.curve);
    CHECK(a.best_genome == b.best_genome);
    CHECK(a.env_calls <= 3001);
    CHECK(a.iterations > 1);
    for (std::size_t i = 1; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].env_calls > a.curve[i - 1].env_calls);
        CHECK(a.curve[i].best_return >= a.curve[i - 1].best_return);
    }
    Environment env(stub());
    CHECK(rollout(env, materialize(a.best_genome)).total_return == a.best_return);
}

TEST_CASE("ga configuration is validated")
{
    GAConfig cfg;
    cfg.truncation_size = 200;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
    cfg = GAConfig{};
    cfg.elite_count = 30;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}
