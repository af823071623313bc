#pragma once

#include "mctspo/policy_net.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mctspo {

enum class EnvKind {
    sparse_mountain_car,
    sparse_acrobot,
};

/// "sparse-mountain-car" / "sparse-acrobot".
std::string env_name(EnvKind kind);
/// Throws ConfigError on an unknown name.
EnvKind env_kind_from_name(const std::string& name);

struct EnvSpec {
    EnvKind kind = EnvKind::sparse_mountain_car;
    int horizon = 100;
    /// Mountain Car: engine power p_car. Acrobot: goal height y_goal.
    double goal_parameter = 0.0015;
    /// Per-step penalty per unit of L1 action magnitude.
    double control_penalty = 0.001;

    static EnvSpec sparse_mountain_car();
    static EnvSpec sparse_acrobot();
    static EnvSpec defaults_for(EnvKind kind);

    void validate() const;

    bool operator==(const EnvSpec&) const = default;
};

struct TaskState {
    std::vector<double> values;
    int step_index = 0;
    bool done = false;

    bool operator==(const TaskState&) const = default;
};

struct StepResult {
    TaskState state;
    double reward = 0.0;
    bool done = false;
    bool reached_goal = false;
};

/// Deterministic task dynamics. Implementations are immutable and shared
/// between environments.
class Dynamics {
public:
    virtual ~Dynamics() = default;

    virtual std::size_t observation_dim() const = 0;
    virtual std::size_t action_dim() const = 0;
    virtual double action_bound(std::size_t k) const = 0;
    virtual int horizon() const = 0;
    virtual double control_penalty() const = 0;

    virtual TaskState reset() const = 0;
    virtual std::vector<double> observe(const TaskState& state) const = 0;
    /// Physics update only; `action` is already clamped to the bounds.
    virtual std::vector<double> advance(std::span<const double> state, std::span<const double> action) const = 0;
    virtual bool goal_reached(std::span<const double> state) const = 0;
};

/// Sparse reward step shared by every task: 1.0 and termination on reaching
/// the goal, otherwise -control_penalty * |a|_1, terminating at the horizon.
StepResult step(const Dynamics& dynamics, const TaskState& state, std::span<const double> action);

std::shared_ptr<const Dynamics> make_dynamics(const EnvSpec& spec);

TaskState reset(const EnvSpec& spec);
StepResult step(const EnvSpec& spec, const TaskState& state, std::span<const double> action);

/// -cos(theta1) - cos(theta1 + theta2): height of the acrobot tip.
double acrobot_tip_height(double theta1, double theta2);

/// Network shape matching the task's observation and action dimensions.
NetworkShape policy_shape_for(const Dynamics& dynamics, std::vector<std::size_t> hidden_dims);

struct Transition {
    std::vector<double> observation;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_observation;
};

struct Trajectory {
    std::vector<Transition> transitions;
    /// Undiscounted sum of rewards.
    double total_return = 0.0;
    bool reached_goal = false;

    std::size_t size() const noexcept { return transitions.size(); }
    bool empty() const noexcept { return transitions.empty(); }
};

inline constexpr std::uint64_t kUnlimitedBudget = std::numeric_limits<std::uint64_t>::max();

/// A task instance that counts environment calls. Every step is charged; a
/// step that would exceed the budget throws BudgetExhausted instead.
class Environment {
public:
    explicit Environment(std::shared_ptr<const Dynamics> dynamics, std::uint64_t budget = kUnlimitedBudget);
    explicit Environment(const EnvSpec& spec, std::uint64_t budget = kUnlimitedBudget);

    const Dynamics& dynamics() const noexcept { return *dynamics_; }
    std::shared_ptr<const Dynamics> shared_dynamics() const { return dynamics_; }

    TaskState reset() const { return dynamics_->reset(); }
    StepResult step(const TaskState& state, std::span<const double> action);

    std::uint64_t calls() const noexcept { return calls_; }
    std::uint64_t budget() const noexcept { return budget_; }
    std::uint64_t remaining() const noexcept { return budget_ - calls_; }

private:
    std::shared_ptr<const Dynamics> dynamics_;
    std::uint64_t budget_;
    std::uint64_t calls_ = 0;
};

using Policy = std::function<std::vector<double>(std::span<const double>)>;

/// One episode from the fixed start state until termination.
Trajectory rollout(Environment& env, const Policy& policy);
Trajectory rollout(Environment& env, const ParameterVector& params);

} // namespace mctspo
