#include "mctspo/safe_mutation.hpp"

#include "mctspo/errors.hpp"

#include <cmath>
#include <spdlog/spdlog.h>
#include <string>

namespace mctspo {

namespace {

void check_trajectory(const ParameterVector& params, const Trajectory& traj)
{
    require(!traj.empty(), "divergence needs a non-empty trajectory");
    require(traj.transitions.front().observation.size() == params.shape().input_dim,
            "trajectory observations do not match the network input");
}

// Outputs of the reference policy over a trajectory, computed once per line search.
class DivergenceEvaluator {
public:
    DivergenceEvaluator(const ParameterVector& reference, const Trajectory& traj) : traj_(traj)
    {
        check_trajectory(reference, traj);
        outputs_.reserve(traj.size());
        for (const auto& t : traj.transitions) {
            outputs_.push_back(forward(reference, t.observation));
        }
    }

    double operator()(const ParameterVector& candidate) const
    {
        double total = 0.0;
        for (std::size_t t = 0; t < traj_.size(); ++t) {
            const std::vector<double> y = forward(candidate, traj_.transitions[t].observation);
            for (std::size_t k = 0; k < y.size(); ++k) {
                const double diff = y[k] - outputs_[t][k];
                total += diff * diff;
            }
        }
        return total / static_cast<double>(traj_.size());
    }

private:
    const Trajectory& traj_;
    std::vector<std::vector<double>> outputs_;
};

} // namespace

void DivergenceBudget::validate() const
{
    require(std::isfinite(max_divergence) && max_divergence > 0.0, "max_divergence must be positive");
    require(shrink_factor > 0.0 && shrink_factor < 1.0, "line-search shrink factor must lie in (0, 1)");
    require(max_iterations > 0, "line-search iteration cap must be positive");
}

double divergence(const ParameterVector& new_params, const ParameterVector& old_params, const Trajectory& traj)
{
    require(new_params.shape() == old_params.shape(), "divergence: policies have different shapes");
    return DivergenceEvaluator(old_params, traj)(new_params);
}

double quadratic_form(const ParameterVector& old_params, const Trajectory& traj, std::span<const double> direction)
{
    check_trajectory(old_params, traj);
    double total = 0.0;
    for (const auto& t : traj.transitions) {
        const std::vector<double> jd = jvp_outputs(old_params, t.observation, direction);
        for (double x : jd) {
            total += x * x;
        }
    }
    return 2.0 * total / static_cast<double>(traj.size());
}

double solve_magnitude(double q, const DivergenceBudget& budget)
{
    require(!std::isnan(q) && q >= 0.0, "solve_magnitude: curvature must be non-negative");
    if (q <= kCurvatureFloor) {
        throw DegenerateDirection("direction has curvature " + std::to_string(q) + " below the floor");
    }
    return std::sqrt(2.0 * budget.max_divergence / q);
}

LineSearchResult line_search_magnitude(const ParameterVector& old_params,
                                       const Trajectory& traj,
                                       std::uint64_t seed,
                                       const DivergenceBudget& budget,
                                       double initial_scale)
{
    budget.validate();
    const DivergenceEvaluator evaluate(old_params, traj);
    const std::vector<double> direction = direction_from_seed(seed, old_params.size());
    // Shaving the quadratic solution by a relative 1e-10 keeps an exactly
    // quadratic divergence from landing a rounding error above the budget.
    double v = solve_magnitude(quadratic_form(old_params, traj, direction), budget) * (1.0 - 1e-10) * initial_scale;

    LineSearchResult result;
    std::vector<double> values(old_params.size());
    for (int i = 0; i < budget.max_iterations; ++i) {
        const auto base = old_params.values();
        for (std::size_t j = 0; j < values.size(); ++j) {
            values[j] = base[j] + v * direction[j];
        }
        result.action = MutationAction::mutate(seed, v);
        result.divergence = evaluate(old_params.with_values(values));
        result.evaluations = i + 1;
        if (result.divergence <= budget.max_divergence) {
            return result;
        }
        if (i + 1 < budget.max_iterations) {
            v *= budget.shrink_factor;
        }
    }
    result.cap_hit = true;
    spdlog::debug("line search for seed {} hit the cap; divergence {} at magnitude {}", seed, result.divergence, v);
    return result;
}

std::vector<MutationAction> get_candidate_actions(const ParameterVector& params,
                                                  const Trajectory& traj,
                                                  std::size_t count,
                                                  const DivergenceBudget& budget,
                                                  SplitMix64& rng,
                                                  std::size_t max_attempts)
{
    require(count >= 1, "candidate count must be positive");
    check_trajectory(params, traj);
    if (max_attempts == 0) {
        max_attempts = 4 * count;
    }
    std::vector<MutationAction> out;
    out.reserve(count);
    std::size_t attempts = 0;
    while (out.size() < count) {
        if (attempts == max_attempts) {
            throw CandidateGenerationFailed("only " + std::to_string(out.size()) + " of " + std::to_string(count)
                                            + " candidate actions found in " + std::to_string(max_attempts)
                                            + " draws");
        }
        ++attempts;
        const std::uint64_t seed = rng.next();
        try {
            const LineSearchResult r = line_search_magnitude(params, traj, seed, budget);
            if (!r.cap_hit) {
                out.push_back(r.action);
            }
        } catch (const DegenerateDirection&) {
            spdlog::trace("seed {} is degenerate, redrawing", seed);
        }
    }
    return out;
}

} // namespace mctspo
