#pragma once

#include "mctspo/env.hpp"
#include "mctspo/genome.hpp"
#include "mctspo/policy_net.hpp"
#include "mctspo/rng.hpp"
#include "mctspo/run_result.hpp"
#include "mctspo/safe_mutation.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace mctspo {

struct SearchConfig {
    double exploration = std::numbers::sqrt2;
    double widening_k = 0.5;
    double widening_alpha = 0.5;
    std::uint64_t iterations = 50000;
    std::size_t candidate_count = 4;
    DivergenceBudget budget;
    /// Nodes at this depth are never widened. 0 means unlimited.
    std::size_t max_depth = 0;

    void validate() const;
};

struct TreeNode;

struct ChildEdge {
    MutationAction action;
    /// N(s,a)
    std::uint64_t visits = 0;
    /// Q(s,a): the best return backed up through this edge. -inf until the
    /// creating simulation returns.
    double value = -std::numeric_limits<double>::infinity();
    std::unique_ptr<TreeNode> child;
};

struct TreeNode {
    /// Creation order of nodes in the tree; assigned on the first visit.
    std::size_t id = 0;
    TreeNode* parent = nullptr;
    std::size_t depth = 0;
    /// Action on the edge from the parent (zero_init for the root).
    MutationAction action = MutationAction::zero();
    bool in_tree = false;

    /// N(s)
    std::uint64_t visits = 0;
    std::vector<ChildEdge> children;
    /// CA(s)
    std::deque<MutationAction> candidates;

    double rollout_return = 0.0;
    bool reached_goal = false;
    /// Trajectories sampled at this node (first visit plus candidate refills).
    std::uint64_t rollouts = 0;
    /// Visits that ended here because nothing could be widened or selected.
    std::uint64_t terminal_visits = 0;
    /// Candidate generation failed; the node is never widened again.
    bool barren = false;
};

/// Progressive widening test: |A(s)| < k * N(s)^alpha.
bool may_widen(const TreeNode& node, double k, double alpha);

/// Index of the child maximizing Q(s,a) + c * sqrt(log N(s) / N(s,a)); ties go
/// to the earliest child.
std::size_t select_ucb(const TreeNode& node, double c);

/// R(s, a, s') = eta(s') - eta(s), with eta(root) = 0.
double edge_reward(const TreeNode& child);

/// One completed call of simulate, root first.
struct SimulationRecord {
    struct Step {
        std::size_t node_id = 0;
        std::size_t edge = 0;
        /// Q(s,a) after the backup.
        double value = 0.0;
        bool widened = false;
        /// |A(s)| before this simulation's widening check.
        std::size_t children_before = 0;
        /// N(s) after this simulation's increment.
        std::uint64_t node_visits = 0;
    };
    std::vector<Step> path;
    std::size_t leaf_id = 0;
    /// Value the leaf returned to its parent: its rollout return.
    double leaf_value = 0.0;
    bool leaf_is_new = false;
};

/// Monte-Carlo tree search over the policy-parameter MDP. States are
/// parameter vectors, actions are seeded mutations, values are backed up by
/// maximum, and leaves are valued by a single rollout of their own policy.
class Search {
public:
    Search(Environment& env, NetworkShape shape, SearchConfig config, std::uint64_t master_seed);

    Search(const Search&) = delete;
    Search& operator=(const Search&) = delete;

    /// One simulation from the root. Throws BudgetExhausted when the
    /// environment runs out of calls; the partial simulation is then rolled
    /// back and leaves no trace in the statistics.
    double simulate();

    const TreeNode& root() const noexcept { return *root_; }
    std::size_t node_count() const noexcept { return node_count_; }
    /// Node with the largest rollout return (earliest on ties). Requires at
    /// least one completed simulation.
    const TreeNode& best_node() const;
    std::uint64_t simulations() const noexcept { return simulations_; }
    const SearchConfig& config() const noexcept { return config_; }
    const NetworkShape& shape() const noexcept { return shape_; }
    std::optional<std::uint64_t> first_goal_env_calls() const noexcept { return first_goal_calls_; }

    Genome genome_of(const TreeNode& node) const;

    void set_observer(std::function<void(const SimulationRecord&)> observer) { observer_ = std::move(observer); }

    /// Rollout of the node's own policy; stores the return and fills CA(s).
    /// Propagates CandidateGenerationFailed after the return is stored.
    double rollout_no_mutation(TreeNode& node, const ParameterVector& params);

private:
    double simulate(TreeNode& node, const ParameterVector& params, SimulationRecord& record);
    double visit_new(TreeNode& node, const ParameterVector& params, SimulationRecord& record);
    void refill_candidates(TreeNode& node, const ParameterVector& params);
    void fill_candidates(TreeNode& node, const ParameterVector& params, const Trajectory& traj);
    ParameterVector child_parameters(const ParameterVector& params, const MutationAction& action) const;

    Environment& env_;
    NetworkShape shape_;
    SearchConfig config_;
    SplitMix64 rng_;
    std::unique_ptr<TreeNode> root_;
    std::size_t node_count_ = 0;
    std::uint64_t simulations_ = 0;
    const TreeNode* best_ = nullptr;
    std::optional<std::uint64_t> first_goal_calls_;
    std::function<void(const SimulationRecord&)> observer_;
};

/// Runs simulations until config.iterations or the environment budget is
/// reached and returns the best node found.
RunResult run_search(Environment& env,
                     const NetworkShape& shape,
                     const SearchConfig& config,
                     std::uint64_t master_seed,
                     bool record_wall_time = false);

/// Structural checks over a finished tree; returns one message per violation.
std::vector<std::string> audit_tree(const Search& search);

} // namespace mctspo
