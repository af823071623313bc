#include "mctspo/env.hpp"

#include "mctspo/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mctspo {

namespace {

// Continuous Mountain Car (Moore 1990; Gym MountainCarContinuous) with a
// goal at x >= 0.5 and a configurable engine power.
class SparseMountainCar final : public Dynamics {
public:
    SparseMountainCar(int horizon, double power, double penalty)
        : horizon_(horizon), power_(power), penalty_(penalty)
    {
    }

    std::size_t observation_dim() const override { return 2; }
    std::size_t action_dim() const override { return 1; }
    double action_bound(std::size_t) const override { return 1.0; }
    int horizon() const override { return horizon_; }
    double control_penalty() const override { return penalty_; }

    TaskState reset() const override { return {{-0.5, 0.0}, 0, false}; }

    std::vector<double> observe(const TaskState& state) const override { return state.values; }

    std::vector<double> advance(std::span<const double> s, std::span<const double> a) const override
    {
        double x = s[0];
        double v = s[1] + a[0] * power_ - 0.0025 * std::cos(3.0 * x);
        v = std::clamp(v, -kMaxSpeed, kMaxSpeed);
        x = std::clamp(x + v, kMinPosition, kMaxPosition);
        if (x == kMinPosition && v < 0.0) {
            v = 0.0;
        }
        return {x, v};
    }

    bool goal_reached(std::span<const double> s) const override { return s[0] >= kGoalPosition; }

private:
    static constexpr double kMinPosition = -1.2;
    static constexpr double kMaxPosition = 0.6;
    static constexpr double kMaxSpeed = 0.07;
    static constexpr double kGoalPosition = 0.5;

    int horizon_;
    double power_;
    double penalty_;
};

// Sutton's two-link acrobot ("book" dynamics, as in Gym), continuous torque
// on the elbow, one RK4 step of dt = 0.2 per environment call.
class SparseAcrobot final : public Dynamics {
public:
    SparseAcrobot(int horizon, double goal_height, double penalty)
        : horizon_(horizon), goal_height_(goal_height), penalty_(penalty)
    {
    }

    std::size_t observation_dim() const override { return 6; }
    std::size_t action_dim() const override { return 1; }
    double action_bound(std::size_t) const override { return 1.0; }
    int horizon() const override { return horizon_; }
    double control_penalty() const override { return penalty_; }

    TaskState reset() const override { return {{0.0, 0.0, 0.0, 0.0}, 0, false}; }

    std::vector<double> observe(const TaskState& state) const override
    {
        const auto& s = state.values;
        return {std::cos(s[0]), std::sin(s[0]), std::cos(s[1]), std::sin(s[1]), s[2], s[3]};
    }

    std::vector<double> advance(std::span<const double> s, std::span<const double> a) const override
    {
        using State = std::array<double, 4>;
        const double torque = a[0];
        const State y0{s[0], s[1], s[2], s[3]};
        auto add = [](const State& y, const State& k, double h) {
            return State{y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
        };
        const State k1 = derivatives(y0, torque);
        const State k2 = derivatives(add(y0, k1, kDt / 2.0), torque);
        const State k3 = derivatives(add(y0, k2, kDt / 2.0), torque);
        const State k4 = derivatives(add(y0, k3, kDt), torque);
        State y;
        for (std::size_t i = 0; i < 4; ++i) {
            y[i] = y0[i] + kDt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        return {wrap(y[0]), wrap(y[1]), std::clamp(y[2], -kMaxVel1, kMaxVel1),
                std::clamp(y[3], -kMaxVel2, kMaxVel2)};
    }

    bool goal_reached(std::span<const double> s) const override
    {
        return acrobot_tip_height(s[0], s[1]) >= goal_height_;
    }

private:
    static constexpr double kDt = 0.2;
    static constexpr double kPi = std::numbers::pi;
    static constexpr double kMaxVel1 = 4.0 * kPi;
    static constexpr double kMaxVel2 = 9.0 * kPi;

    static double wrap(double angle)
    {
        constexpr double span = 2.0 * kPi;
        while (angle > kPi) {
            angle -= span;
        }
        while (angle < -kPi) {
            angle += span;
        }
        return angle;
    }

    static std::array<double, 4> derivatives(const std::array<double, 4>& s, double torque)
    {
        constexpr double m1 = 1.0, m2 = 1.0, l1 = 1.0, lc1 = 0.5, lc2 = 0.5, i1 = 1.0, i2 = 1.0, g = 9.8;
        const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
        const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
        const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
        const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - kPi / 2.0);
        const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2)
                            - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2)
                            + (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - kPi / 2.0) + phi2;
        const double ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2)
                                / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
        const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
        return {dtheta1, dtheta2, ddtheta1, ddtheta2};
    }

    int horizon_;
    double goal_height_;
    double penalty_;
};

} // namespace

std::string env_name(EnvKind kind)
{
    switch (kind) {
    case EnvKind::sparse_mountain_car:
        return "sparse-mountain-car";
    case EnvKind::sparse_acrobot:
        return "sparse-acrobot";
    }
    return "unknown";
}

EnvKind env_kind_from_name(const std::string& name)
{
    if (name == "sparse-mountain-car") {
        return EnvKind::sparse_mountain_car;
    }
    if (name == "sparse-acrobot") {
        return EnvKind::sparse_acrobot;
    }
    throw ConfigError("unknown environment '" + name + "' (expected sparse-mountain-car or sparse-acrobot)");
}

EnvSpec EnvSpec::sparse_mountain_car()
{
    return {EnvKind::sparse_mountain_car, 100, 0.0015, 0.001};
}

EnvSpec EnvSpec::sparse_acrobot()
{
    return {EnvKind::sparse_acrobot, 100, 1.999, 0.001};
}

EnvSpec EnvSpec::defaults_for(EnvKind kind)
{
    return kind == EnvKind::sparse_acrobot ? sparse_acrobot() : sparse_mountain_car();
}

void EnvSpec::validate() const
{
    require(horizon > 0, "environment horizon must be positive");
    require(std::isfinite(goal_parameter) && goal_parameter > 0.0, "environment goal parameter must be positive");
    require(std::isfinite(control_penalty) && control_penalty >= 0.0, "control penalty must be non-negative");
}

StepResult step(const Dynamics& dynamics, const TaskState& state, std::span<const double> action)
{
    require(!state.done, "step called on a finished episode");
    require(state.step_index < dynamics.horizon(), "step called past the horizon");
    if (action.size() != dynamics.action_dim()) {
        throw ContractViolation("action has " + std::to_string(action.size()) + " entries, task expects "
                                + std::to_string(dynamics.action_dim()));
    }
    std::vector<double> clamped(action.size());
    double l1 = 0.0;
    for (std::size_t k = 0; k < action.size(); ++k) {
        require(!std::isnan(action[k]), "action contains NaN");
        const double bound = dynamics.action_bound(k);
        clamped[k] = std::clamp(action[k], -bound, bound);
        l1 += std::abs(clamped[k]);
    }

    StepResult result;
    result.state.values = dynamics.advance(state.values, clamped);
    result.state.step_index = state.step_index + 1;
    result.reached_goal = dynamics.goal_reached(result.state.values);
    if (result.reached_goal) {
        result.reward = 1.0;
        result.done = true;
    } else {
        result.reward = -dynamics.control_penalty() * l1;
        result.done = result.state.step_index == dynamics.horizon();
    }
    result.state.done = result.done;
    return result;
}

std::shared_ptr<const Dynamics> make_dynamics(const EnvSpec& spec)
{
    spec.validate();
    switch (spec.kind) {
    case EnvKind::sparse_mountain_car:
        return std::make_shared<SparseMountainCar>(spec.horizon, spec.goal_parameter, spec.control_penalty);
    case EnvKind::sparse_acrobot:
        return std::make_shared<SparseAcrobot>(spec.horizon, spec.goal_parameter, spec.control_penalty);
    }
    throw ContractViolation("unknown environment kind");
}

TaskState reset(const EnvSpec& spec)
{
    return make_dynamics(spec)->reset();
}

StepResult step(const EnvSpec& spec, const TaskState& state, std::span<const double> action)
{
    return step(*make_dynamics(spec), state, action);
}

double acrobot_tip_height(double theta1, double theta2)
{
    return -std::cos(theta1) - std::cos(theta1 + theta2);
}

NetworkShape policy_shape_for(const Dynamics& dynamics, std::vector<std::size_t> hidden_dims)
{
    NetworkShape shape;
    shape.input_dim = dynamics.observation_dim();
    shape.hidden_dims = std::move(hidden_dims);
    shape.output_dim = dynamics.action_dim();
    for (std::size_t k = 0; k < shape.output_dim; ++k) {
        shape.output_bounds.push_back(dynamics.action_bound(k));
    }
    shape.validate();
    return shape;
}

Environment::Environment(std::shared_ptr<const Dynamics> dynamics, std::uint64_t budget)
    : dynamics_(std::move(dynamics)), budget_(budget)
{
    require(dynamics_ != nullptr, "Environment needs dynamics");
}

Environment::Environment(const EnvSpec& spec, std::uint64_t budget) : Environment(make_dynamics(spec), budget) {}

StepResult Environment::step(const TaskState& state, std::span<const double> action)
{
    if (calls_ >= budget_) {
        throw BudgetExhausted("environment call budget of " + std::to_string(budget_) + " exhausted");
    }
    ++calls_;
    return mctspo::step(*dynamics_, state, action);
}

Trajectory rollout(Environment& env, const Policy& policy)
{
    Trajectory traj;
    traj.transitions.reserve(static_cast<std::size_t>(env.dynamics().horizon()));
    TaskState state = env.reset();
    std::vector<double> obs = env.dynamics().observe(state);
    while (!state.done) {
        std::vector<double> action = policy(obs);
        StepResult r = env.step(state, action);
        std::vector<double> next_obs = env.dynamics().observe(r.state);
        traj.total_return += r.reward;
        traj.reached_goal = traj.reached_goal || r.reached_goal;
        traj.transitions.push_back({std::move(obs), std::move(action), r.reward, next_obs});
        obs = std::move(next_obs);
        state = std::move(r.state);
    }
    return traj;
}

Trajectory rollout(Environment& env, const ParameterVector& params)
{
    const NetworkShape& shape = params.shape();
    if (shape.input_dim != env.dynamics().observation_dim() || shape.output_dim != env.dynamics().action_dim()) {
        throw ContractViolation("policy network dimensions do not match the task");
    }
    return rollout(env, [&params](std::span<const double> obs) { return forward(params, obs); });
}

} // namespace mctspo
