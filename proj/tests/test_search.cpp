#include "mctspo/errors.hpp"
#include "mctspo/search.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

using namespace mctspo;

namespace {

const NetworkShape kStubShape{2, {4}, 1};

std::shared_ptr<const Dynamics> stub(int horizon = 5)
{
    return std::make_shared<test_support::StubDynamics>(horizon);
}

// Observations so large that a network without hidden layers saturates and
// every mutation direction is degenerate.
class SaturatingDynamics final : public Dynamics {
public:
    std::size_t observation_dim() const override { return 1; }
    std::size_t action_dim() const override { return 1; }
    double action_bound(std::size_t) const override { return 1.0; }
    int horizon() const override { return 3; }
    double control_penalty() const override { return 0.1; }
    TaskState reset() const override { return {{1e9}, 0, false}; }
    std::vector<double> observe(const TaskState& s) const override { return s.values; }
    std::vector<double> advance(std::span<const double> s, std::span<const double>) const override
    {
        return {s[0]};
    }
    bool goal_reached(std::span<const double>) const override { return false; }
};

TreeNode node_with_children(const std::vector<std::pair<double, std::uint64_t>>& edges)
{
    TreeNode n;
    n.in_tree = true;
    for (const auto& [q, visits] : edges) {
        n.children.push_back(ChildEdge{MutationAction::mutate(0, 1.0), visits, q, std::make_unique<TreeNode>()});
        n.visits += visits;
    }
    return n;
}

std::map<std::size_t, const TreeNode*> index_nodes(const TreeNode& root)
{
    std::map<std::size_t, const TreeNode*> out;
    std::vector<const TreeNode*> stack{&root};
    while (!stack.empty()) {
        const TreeNode* n = stack.back();
        stack.pop_back();
        if (!n->in_tree) {
            continue;
        }
        out[n->id] = n;
        for (const auto& e : n->children) {
            stack.push_back(e.child.get());
        }
    }
    return out;
}

} // namespace

TEST_CASE("ucb picks the greedy child when exploration is off")
{
    const TreeNode n = node_with_children({{0.1, 3}, {0.7, 1}, {0.4, 9}});
    CHECK(select_ucb(n, 0.0) == 1);
}

TEST_CASE("ucb with a single child")
{
    const TreeNode n = node_with_children({{-0.3, 1}});
    CHECK(n.visits == 1);
    CHECK(select_ucb(n, std::numbers::sqrt2) == 0);
}

TEST_CASE("ucb ties go to the earliest child")
{
    const TreeNode n = node_with_children({{0.5, 2}, {0.5, 2}, {0.5, 2}});
    CHECK(select_ucb(n, 1.0) == 0);
    const TreeNode m = node_with_children({{0.2, 2}, {0.5, 2}, {0.5, 2}});
    CHECK(select_ucb(m, 1.0) == 1);
}

TEST_CASE("ucb matches exhaustive scoring")
{
    SplitMix64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<double, std::uint64_t>> edges;
        for (int i = 0; i < 5; ++i) {
            edges.emplace_back(rng.normal(), 1 + rng.bounded(20));
        }
        const TreeNode n = node_with_children(edges);
        const double c = std::sqrt(2.0);
        std::size_t want = 0;
        double best = -1e300;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const double score = edges[i].first
                                 + c * std::sqrt(std::log(static_cast<double>(n.visits))
                                                 / static_cast<double>(edges[i].second));
            if (score > best) {
                best = score;
                want = i;
            }
        }
        CHECK(select_ucb(n, c) == want);
    }
}

TEST_CASE("ucb refuses a childless node")
{
    TreeNode n;
    CHECK_THROWS_AS(select_ucb(n, 1.0), ContractViolation);
}

TEST_CASE("progressive widening bound")
{
    TreeNode n;
    n.visits = 1;
    CHECK(may_widen(n, 0.3, 0.3));
    n.children.push_back(ChildEdge{});
    CHECK_FALSE(may_widen(n, 0.3, 0.3));
    n.visits = 16;
    CHECK(may_widen(n, 0.5, 0.5));
    n.children.push_back(ChildEdge{});
    CHECK_FALSE(may_widen(n, 0.5, 0.5));
    n.visits = 0;
    n.children.clear();
    CHECK_FALSE(may_widen(n, 0.5, 0.5));
}

TEST_CASE("first simulation rolls out the zero root")
{
    Environment env(EnvSpec::sparse_mountain_car());
    Search search(env, NetworkShape{2, {8}, 1}, SearchConfig{}, 1);
    const double q = search.simulate();
    CHECK(q == 0.0);
    CHECK(search.node_count() == 1);
    CHECK(env.calls() == 100);
    CHECK(search.root().rollouts == 1);
    CHECK(search.root().visits == 0);
    CHECK(search.root().candidates.size() == 4);
    for (const auto& a : search.root().candidates) {
        CHECK(a.kind == ActionKind::seeded_init);
    }
    CHECK(search.best_node().id == 0);
    CHECK(search.genome_of(search.root()).actions == std::vector<MutationAction>{MutationAction::zero()});
}

TEST_CASE("new nodes are descended into and get a full candidate buffer")
{
    Environment env(stub());
    SearchConfig cfg;
    Search search(env, kStubShape, cfg, 3);
    search.simulate();
    search.simulate();
    REQUIRE(search.root().children.size() == 1);
    const auto& edge = search.root().children.front();
    CHECK(edge.visits == 1);
    CHECK(edge.value == edge.child->rollout_return);
    CHECK(edge.child->candidates.size() == cfg.candidate_count);
    CHECK(edge.child->rollouts == 1);
    CHECK(search.root().candidates.size() == cfg.candidate_count - 1);
}

TEST_CASE("rollout without mutation is deterministic")
{
    Environment env(stub());
    Search search(env, kStubShape, SearchConfig{}, 3);
    TreeNode a;
    TreeNode b;
    a.parent = b.parent = const_cast<TreeNode*>(&search.root());
    a.depth = b.depth = 1;
    const auto p = init_from_seed(kStubShape, 5);
    CHECK(search.rollout_no_mutation(a, p) == search.rollout_no_mutation(b, p));
    CHECK(a.candidates.size() == 4);
}

TEST_CASE("backed up values equal the maximum logged return through each edge")
{
    Environment env(stub());
    SearchConfig cfg;
    cfg.widening_k = 1.0;
    Search search(env, kStubShape, cfg, 17);

    std::map<std::pair<std::size_t, std::size_t>, double> max_return;
    std::map<std::pair<std::size_t, std::size_t>, double> last_value;
    std::map<std::size_t, std::uint64_t> reached;
    bool monotone = true;
    bool widened_within_bound = true;
    search.set_observer([&](const SimulationRecord& rec) {
        for (const auto& step : rec.path) {
            const auto key = std::make_pair(step.node_id, step.edge);
            auto [it, fresh] = max_return.try_emplace(key, rec.leaf_value);
            if (!fresh) {
                it->second = std::max(it->second, rec.leaf_value);
            }
            if (last_value.count(key) && step.value < last_value[key]) {
                monotone = false;
            }
            last_value[key] = step.value;
            ++reached[step.node_id];
            if (step.widened
                && !(static_cast<double>(step.children_before)
                     < cfg.widening_k * std::pow(static_cast<double>(step.node_visits), cfg.widening_alpha))) {
                widened_within_bound = false;
            }
        }
        ++reached[rec.leaf_id];
    });

    for (int i = 0; i < 2000; ++i) {
        search.simulate();
    }
    CHECK(monotone);
    CHECK(widened_within_bound);

    const auto nodes = index_nodes(search.root());
    CHECK(nodes.size() == search.node_count());
    std::size_t edges = 0;
    for (const auto& [id, node] : nodes) {
        CHECK(node->visits + 1 == reached[id]);
        for (std::size_t i = 0; i < node->children.size(); ++i) {
            const auto key = std::make_pair(id, i);
            REQUIRE(max_return.count(key) == 1);
            CHECK(node->children[i].value == max_return[key]);
            ++edges;
        }
    }
    CHECK(edges == search.node_count() - 1);
    CHECK(audit_tree(search).empty());
}

TEST_CASE("every node replays to its recorded return")
{
    Environment env(stub());
    Search search(env, kStubShape, SearchConfig{}, 5);
    for (int i = 0; i < 300; ++i) {
        search.simulate();
    }
    for (const auto& [id, node] : index_nodes(search.root())) {
        const Genome g = search.genome_of(*node);
        CHECK(g.actions.size() == std::max<std::size_t>(node->depth, 1));
        Environment fresh(stub());
        CHECK(rollout(fresh, materialize(g)).total_return == node->rollout_return);
    }
}

TEST_CASE("path rewards telescope to the leaf return")
{
    Environment env(stub());
    SearchConfig cfg;
    cfg.max_depth = 3;
    Search search(env, kStubShape, cfg, 8);
    for (int i = 0; i < 500; ++i) {
        search.simulate();
    }
    std::size_t deepest = 0;
    for (const auto& [id, node] : index_nodes(search.root())) {
        deepest = std::max(deepest, node->depth);
        if (node->parent == nullptr) {
            continue;
        }
        double sum = 0.0;
        for (const TreeNode* n = node; n->parent != nullptr; n = n->parent) {
            sum += edge_reward(*n);
        }
        CHECK(std::abs(sum - node->rollout_return) <= 1e-12);
    }
    CHECK(deepest == 3);
    CHECK_THROWS_AS(edge_reward(search.root()), ContractViolation);
}

TEST_CASE("barren nodes absorb visits without widening")
{
    Environment env(std::make_shared<SaturatingDynamics>());
    Search search(env, NetworkShape{1, {}, 1}, SearchConfig{}, 2);
    for (int i = 0; i < 50; ++i) {
        search.simulate();
    }
    std::uint64_t terminal = 0;
    for (const auto& [id, node] : index_nodes(search.root())) {
        if (node->parent != nullptr) {
            CHECK(node->barren);
            CHECK(node->children.empty());
            terminal += node->terminal_visits;
        }
    }
    CHECK(terminal > 0);
    CHECK(audit_tree(search).empty());
}

TEST_CASE("budget exhaustion leaves the statistics untouched")
{
    for (std::uint64_t budget : {7ULL, 33ULL, 101ULL, 257ULL, 1000ULL}) {
        Environment env(stub(), budget);
        Search search(env, kStubShape, SearchConfig{}, 4);
        std::uint64_t completed = 0;
        std::map<std::size_t, std::uint64_t> reached;
        search.set_observer([&](const SimulationRecord& rec) {
            ++completed;
            for (const auto& s : rec.path) {
                ++reached[s.node_id];
            }
            ++reached[rec.leaf_id];
        });
        bool exhausted = false;
        for (int i = 0; i < 100000 && !exhausted; ++i) {
            try {
                search.simulate();
            } catch (const BudgetExhausted&) {
                exhausted = true;
            }
        }
        CHECK(exhausted);
        CHECK(env.calls() == budget);
        CHECK(search.simulations() == completed);
        CHECK(audit_tree(search).empty());
        for (const auto& [id, node] : index_nodes(search.root())) {
            CHECK(node->visits + 1 == reached[id]);
        }
    }
}

TEST_CASE("run with a budget for the root only")
{
    Environment env(EnvSpec::sparse_mountain_car(), 150);
    const auto r = run_search(env, NetworkShape{2, {8}, 1}, SearchConfig{}, 1);
    CHECK(r.best_return == 0.0);
    CHECK(r.iterations == 1);
    CHECK(r.best_genome.actions == std::vector<MutationAction>{MutationAction::zero()});
    CHECK(env.calls() <= 150);
    REQUIRE_FALSE(r.curve.empty());
    CHECK(r.curve.back().best_return == 0.0);

    Environment tiny(EnvSpec::sparse_mountain_car(), 50);
    const auto none = run_search(tiny, NetworkShape{2, {8}, 1}, SearchConfig{}, 1);
    CHECK(none.iterations == 0);
    CHECK(std::isinf(none.best_return));
}

TEST_CASE("runs are reproducible from the master seed")
{
    auto run = [](std::uint64_t seed) {
        Environment env(EnvSpec::sparse_mountain_car(), 20000);
        return run_search(env, NetworkShape{2, {8}, 1}, SearchConfig{}, seed);
    };
    const auto a = run(3);
    const auto b = run(3);
    const auto c = run(4);
    CHECK(a.best_genome == b.best_genome);
    CHECK(a.curve == b.curve);
    CHECK(a.best_return == b.best_return);
    CHECK(a.env_calls == b.env_calls);
    CHECK(c.env_calls == a.env_calls);

    Environment env(EnvSpec::sparse_mountain_car());
    CHECK(rollout(env, materialize(a.best_genome)).total_return == a.best_return);

    Environment s1(stub(), 5000);
    Environment s2(stub(), 5000);
    CHECK_FALSE(run_search(s1, kStubShape, SearchConfig{}, 1).curve
                == run_search(s2, kStubShape, SearchConfig{}, 2).curve);
}

TEST_CASE("curve is strictly increasing in calls and non-decreasing in return")
{
    Environment env(stub(), 30000);
    const auto r = run_search(env, kStubShape, SearchConfig{}, 6);
    REQUIRE(r.curve.size() >= 2);
    for (std::size_t i = 1; i < r.curve.size(); ++i) {
        CHECK(r.curve[i].env_calls > r.curve[i - 1].env_calls);
        CHECK(r.curve[i].best_return >= r.curve[i - 1].best_return);
        CHECK(r.curve[i].wall_ms == 0.0);
    }
    CHECK(r.curve.back().env_calls == r.env_calls);
    CHECK(r.curve.back().best_return == r.best_return);
}

TEST_CASE("iteration limit stops the run")
{
    Environment env(stub());
    SearchConfig cfg;
    cfg.iterations = 25;
    const auto r = run_search(env, kStubShape, cfg, 1);
    CHECK(r.iterations == 25);
}

TEST_CASE("search rejects invalid configurations")
{
    Environment env(stub());
    SearchConfig bad;
    bad.widening_alpha = 0.0;
    CHECK_THROWS_AS(Search(env, kStubShape, bad, 1), ContractViolation);
    CHECK_THROWS_AS(Search(env, NetworkShape{3, {4}, 1}, SearchConfig{}, 1), ContractViolation);
}
