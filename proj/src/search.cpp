#include "mctspo/search.hpp"

#include "mctspo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

namespace mctspo {

namespace {

constexpr std::uint64_t kSearchDomain = 0x6d63747370; // "mctsp"

} // namespace

void SearchConfig::validate() const
{
    require(std::isfinite(exploration) && exploration >= 0.0, "exploration constant must be non-negative");
    require(std::isfinite(widening_k) && widening_k > 0.0, "widening k must be positive");
    require(widening_alpha > 0.0 && widening_alpha <= 1.0, "widening alpha must lie in (0, 1]");
    require(iterations > 0, "iteration count must be positive");
    require(candidate_count > 0, "candidate count must be positive");
    budget.validate();
}

bool may_widen(const TreeNode& node, double k, double alpha)
{
    return static_cast<double>(node.children.size()) < k * std::pow(static_cast<double>(node.visits), alpha);
}

std::size_t select_ucb(const TreeNode& node, double c)
{
    require(!node.children.empty(), "select_ucb: node has no children");
    const double log_n = std::log(static_cast<double>(node.visits));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        const ChildEdge& e = node.children[i];
        require(e.visits >= 1, "select_ucb: every child must have been visited");
        const double score = e.value + c * std::sqrt(log_n / static_cast<double>(e.visits));
        if (i == 0 || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

double edge_reward(const TreeNode& child)
{
    require(child.parent != nullptr, "edge_reward: the root has no incoming edge");
    const double parent_value = child.parent->parent == nullptr ? 0.0 : child.parent->rollout_return;
    return child.rollout_return - parent_value;
}

Search::Search(Environment& env, NetworkShape shape, SearchConfig config, std::uint64_t master_seed)
    : env_(env),
      shape_(std::move(shape)),
      config_(std::move(config)),
      rng_(derive_stream(master_seed, kSearchDomain)),
      root_(std::make_unique<TreeNode>())
{
    config_.validate();
    shape_.validate();
    if (shape_.input_dim != env_.dynamics().observation_dim() || shape_.output_dim != env_.dynamics().action_dim()) {
        throw ContractViolation("search network shape does not match the task dimensions");
    }
}

const TreeNode& Search::best_node() const
{
    require(best_ != nullptr, "best_node: no simulation has completed");
    return *best_;
}

Genome Search::genome_of(const TreeNode& node) const
{
    std::vector<MutationAction> actions;
    for (const TreeNode* n = &node; n->parent != nullptr; n = n->parent) {
        actions.push_back(n->action);
    }
    if (actions.empty()) {
        actions.push_back(MutationAction::zero());
    }
    std::reverse(actions.begin(), actions.end());
    return Genome{shape_, std::move(actions)};
}

double Search::simulate()
{
    const ParameterVector root_params = ParameterVector::zeros(shape_);
    SimulationRecord record;
    const double q = simulate(*root_, root_params, record);
    ++simulations_;
    if (observer_) {
        std::reverse(record.path.begin(), record.path.end());
        observer_(record);
    }
    return q;
}

ParameterVector Search::child_parameters(const ParameterVector& params, const MutationAction& action) const
{
    if (action.is_init()) {
        return initial_parameters(shape_, action);
    }
    std::vector<double> values(params.values().begin(), params.values().end());
    apply_mutation_inplace(values, action);
    return params.with_values(std::move(values));
}

double Search::rollout_no_mutation(TreeNode& node, const ParameterVector& params)
{
    const Trajectory traj = rollout(env_, params);
    ++node.rollouts;
    node.rollout_return = traj.total_return;
    node.reached_goal = traj.reached_goal;
    if (traj.reached_goal && !first_goal_calls_) {
        first_goal_calls_ = env_.calls();
    }
    fill_candidates(node, params, traj);
    return node.rollout_return;
}

void Search::fill_candidates(TreeNode& node, const ParameterVector& params, const Trajectory& traj)
{
    if (config_.max_depth != 0 && node.depth >= config_.max_depth) {
        return;
    }
    if (node.parent == nullptr) {
        // Children of the root are fresh initializations and need no trajectory.
        for (std::size_t i = 0; i < config_.candidate_count; ++i) {
            node.candidates.push_back(MutationAction::init(rng_.next()));
        }
        return;
    }
    const auto actions = get_candidate_actions(params, traj, config_.candidate_count, config_.budget, rng_);
    node.candidates.insert(node.candidates.end(), actions.begin(), actions.end());
}

void Search::refill_candidates(TreeNode& node, const ParameterVector& params)
{
    if (node.parent == nullptr) {
        fill_candidates(node, params, Trajectory{});
        return;
    }
    const Trajectory traj = rollout(env_, params);
    ++node.rollouts;
    fill_candidates(node, params, traj);
}

double Search::visit_new(TreeNode& node, const ParameterVector& params, SimulationRecord& record)
{
    double value = 0.0;
    try {
        value = rollout_no_mutation(node, params);
    } catch (const CandidateGenerationFailed& e) {
        spdlog::debug("node at depth {} cannot be expanded: {}", node.depth, e.what());
        node.barren = true;
        node.candidates.clear();
        value = node.rollout_return;
    }
    node.in_tree = true;
    node.id = node_count_++;
    if (best_ == nullptr || node.rollout_return > best_->rollout_return) {
        best_ = &node;
    }
    record.leaf_id = node.id;
    record.leaf_value = value;
    record.leaf_is_new = true;
    return value;
}

double Search::simulate(TreeNode& node, const ParameterVector& params, SimulationRecord& record)
{
    if (!node.in_tree) {
        return visit_new(node, params, record);
    }

    ++node.visits;
    SimulationRecord::Step step;
    step.node_id = node.id;
    step.children_before = node.children.size();
    step.node_visits = node.visits;
    bool refilled = false;
    const std::uint64_t rollouts_before = node.rollouts;
    ChildEdge* edge = nullptr;
    try {
        const bool depth_ok = config_.max_depth == 0 || node.depth < config_.max_depth;
        if (!node.barren && depth_ok && may_widen(node, config_.widening_k, config_.widening_alpha)) {
            if (node.candidates.empty()) {
                try {
                    refilled = true;
                    refill_candidates(node, params);
                } catch (const CandidateGenerationFailed& e) {
                    spdlog::debug("candidate refill failed at depth {}: {}", node.depth, e.what());
                    node.barren = true;
                    node.candidates.clear();
                }
            }
            if (!node.candidates.empty()) {
                auto child = std::make_unique<TreeNode>();
                child->parent = &node;
                child->depth = node.depth + 1;
                child->action = node.candidates.front();
                node.candidates.pop_front();
                node.children.push_back(ChildEdge{child->action, 0, -std::numeric_limits<double>::infinity(),
                                                  std::move(child)});
                step.widened = true;
                step.edge = node.children.size() - 1;
            }
        }
        if (!step.widened) {
            if (node.children.empty()) {
                ++node.terminal_visits;
                record.leaf_id = node.id;
                record.leaf_value = node.rollout_return;
                record.leaf_is_new = false;
                return node.rollout_return;
            }
            step.edge = select_ucb(node, config_.exploration);
        }

        edge = &node.children[step.edge];
        ++edge->visits;
        const double q = simulate(*edge->child, child_parameters(params, edge->action), record);
        if (q > edge->value) {
            edge->value = q;
        }
        step.value = edge->value;
        record.path.push_back(step);
        return edge->value;
    } catch (const BudgetExhausted&) {
        --node.visits;
        if (edge != nullptr) {
            --edge->visits;
        }
        if (step.widened) {
            node.candidates.push_front(node.children.back().action);
            node.children.pop_back();
        }
        if (refilled) {
            node.candidates.clear();
            node.barren = false;
            node.rollouts = rollouts_before;
        }
        throw;
    }
}

RunResult run_search(Environment& env,
                     const NetworkShape& shape,
                     const SearchConfig& config,
                     std::uint64_t master_seed,
                     bool record_wall_time)
{
    Search search(env, shape, config, master_seed);
    CurveRecorder curve(env.budget(), record_wall_time);
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < config.iterations; ++i) {
        try {
            search.simulate();
        } catch (const BudgetExhausted&) {
            break;
        }
        const double current = search.best_node().rollout_return;
        const bool improved = current > best;
        best = std::max(best, current);
        curve.record(env.calls(), best, improved);
    }

    RunResult result;
    result.env_calls = env.calls();
    result.iterations = search.simulations();
    result.first_goal_env_calls = search.first_goal_env_calls();
    if (search.node_count() == 0) {
        // Not even the root rollout fit in the budget.
        result.best_genome = search.genome_of(search.root());
        result.best_return = -std::numeric_limits<double>::infinity();
        return result;
    }
    const TreeNode& best_node = search.best_node();
    result.best_genome = search.genome_of(best_node);
    result.best_return = best_node.rollout_return;
    result.best_reached_goal = best_node.reached_goal;
    curve.finish(env.calls(), result.best_return);
    result.curve = curve.take();
    spdlog::debug("search finished: {} simulations, {} nodes, {} env calls, best {}", result.iterations,
                  search.node_count(), result.env_calls, result.best_return);
    return result;
}

namespace {

void audit_node(const TreeNode& node, const SearchConfig& config, std::vector<std::string>& out)
{
    if (!node.in_tree) {
        out.push_back("node reachable from the root was never visited");
        return;
    }
    std::uint64_t edge_visits = 0;
    for (const auto& e : node.children) {
        edge_visits += e.visits;
        if (e.visits == 0) {
            out.push_back("node " + std::to_string(node.id) + " has an unvisited child");
        }
        if (!(e.value >= e.child->rollout_return)) {
            out.push_back("node " + std::to_string(node.id) + " has Q below its child's rollout return");
        }
    }
    if (node.visits != edge_visits + node.terminal_visits) {
        out.push_back("node " + std::to_string(node.id) + ": N(s) = " + std::to_string(node.visits)
                      + " but edge visits + terminal visits = " + std::to_string(edge_visits + node.terminal_visits));
    }
    // Each child was added while the count was strictly below the bound and
    // N(s) never decreases, so |A(s)| - 1 < k N(s)^alpha must still hold.
    if (!node.children.empty()) {
        const double bound = config.widening_k * std::pow(static_cast<double>(node.visits), config.widening_alpha);
        if (!(static_cast<double>(node.children.size() - 1) < bound)) {
            out.push_back("node " + std::to_string(node.id) + " exceeds the widening bound");
        }
    }
    for (const auto& e : node.children) {
        audit_node(*e.child, config, out);
    }
}

} // namespace

std::vector<std::string> audit_tree(const Search& search)
{
    std::vector<std::string> out;
    if (search.root().in_tree) {
        audit_node(search.root(), search.config(), out);
    }
    return out;
}

} // namespace mctspo
