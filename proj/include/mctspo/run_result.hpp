#pragma once

#include "mctspo/genome.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

namespace mctspo {

struct CurvePoint {
    std::uint64_t env_calls = 0;
    double best_return = 0.0;
    /// Milliseconds since the run started; 0 unless wall time is recorded.
    double wall_ms = 0.0;

    bool operator==(const CurvePoint&) const = default;
};

/// Best-so-far learning curve. A point is kept whenever the best return
/// improves and at every 1% of the budget; env_calls is strictly increasing.
class CurveRecorder {
public:
    CurveRecorder(std::uint64_t budget, bool record_wall_time);

    void record(std::uint64_t env_calls, double best_return, bool improved);
    void finish(std::uint64_t env_calls, double best_return);

    const std::vector<CurvePoint>& points() const noexcept { return points_; }
    std::vector<CurvePoint> take() { return std::move(points_); }

private:
    void push(std::uint64_t env_calls, double best_return);

    std::uint64_t interval_;
    std::uint64_t next_checkpoint_;
    bool record_wall_time_;
    std::chrono::steady_clock::time_point start_;
    std::vector<CurvePoint> points_;
};

struct RunResult {
    Genome best_genome;
    double best_return = 0.0;
    bool best_reached_goal = false;
    std::vector<CurvePoint> curve;
    std::uint64_t env_calls = 0;
    /// Environment calls consumed when a rollout first reached the goal.
    std::optional<std::uint64_t> first_goal_env_calls;
    /// Completed simulations (search) or generations (GA).
    std::uint64_t iterations = 0;
};

} // namespace mctspo
