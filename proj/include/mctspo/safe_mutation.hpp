#pragma once

#include "mctspo/env.hpp"
#include "mctspo/genome.hpp"
#include "mctspo/policy_net.hpp"
#include "mctspo/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mctspo {

struct DivergenceBudget {
    double max_divergence = 1.0;
    double shrink_factor = 0.5;
    int max_iterations = 20;

    void validate() const;
};

/// Below this curvature a direction is treated as lying in the output null space.
inline constexpr double kCurvatureFloor = 1e-12;

/// Mean over the trajectory's observations of the squared output difference
/// between the two policies, summed over output dimensions.
double divergence(const ParameterVector& new_params, const ParameterVector& old_params, const Trajectory& traj);

/// Curvature of the divergence along `direction` at new == old:
/// (2/T) * sum_t |J_t direction|^2, the Gauss-Newton form, which is exact
/// here because the residuals vanish at the expansion point.
double quadratic_form(const ParameterVector& old_params, const Trajectory& traj, std::span<const double> direction);

/// sqrt(2 * max_divergence / q). Throws DegenerateDirection for q <= kCurvatureFloor.
double solve_magnitude(double q, const DivergenceBudget& budget);

struct LineSearchResult {
    MutationAction action;
    /// Divergence of the accepted (or last tried) magnitude.
    double divergence = 0.0;
    int evaluations = 0;
    /// True when the iteration cap stopped the search before the budget was met.
    bool cap_hit = false;
};

LineSearchResult line_search_magnitude(const ParameterVector& old_params,
                                       const Trajectory& traj,
                                       std::uint64_t seed,
                                       const DivergenceBudget& budget,
                                       double initial_scale = 1.0);

/// Draws `count` fresh seeds from `rng` and line-searches a magnitude for
/// each. Degenerate directions and searches that hit the cap are redrawn, up
/// to `max_attempts` draws in total (0 means 4 * count).
std::vector<MutationAction> get_candidate_actions(const ParameterVector& params,
                                                  const Trajectory& traj,
                                                  std::size_t count,
                                                  const DivergenceBudget& budget,
                                                  SplitMix64& rng,
                                                  std::size_t max_attempts = 0);

} // namespace mctspo
