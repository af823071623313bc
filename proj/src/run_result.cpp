#include "mctspo/run_result.hpp"

#include "mctspo/env.hpp"

#include <algorithm>

namespace mctspo {

CurveRecorder::CurveRecorder(std::uint64_t budget, bool record_wall_time)
    : interval_(budget == kUnlimitedBudget ? kUnlimitedBudget : std::max<std::uint64_t>(1, budget / 100)),
      next_checkpoint_(interval_),
      record_wall_time_(record_wall_time),
      start_(std::chrono::steady_clock::now())
{
}

void CurveRecorder::record(std::uint64_t env_calls, double best_return, bool improved)
{
    const bool checkpoint = env_calls >= next_checkpoint_;
    if (checkpoint) {
        next_checkpoint_ = (env_calls / interval_ + 1) * interval_;
    }
    if (improved || checkpoint || points_.empty()) {
        push(env_calls, best_return);
    }
}

void CurveRecorder::finish(std::uint64_t env_calls, double best_return)
{
    push(env_calls, best_return);
}

void CurveRecorder::push(std::uint64_t env_calls, double best_return)
{
    CurvePoint p{env_calls, best_return, 0.0};
    if (record_wall_time_) {
        p.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
    if (!points_.empty() && points_.back().env_calls >= env_calls) {
        points_.back() = p;
    } else {
        points_.push_back(p);
    }
}

} // namespace mctspo
