#pragma once

#include "parex/annotations.hpp"
#include "parex/core.hpp"

#include <vector>

namespace fixtures {

// Two agents, first and second half of a 100-frame timeline, both at plan 0.
inline parex::ParallelPlan fix_a() {
    parex::ParallelPlan plan;
    plan.n_agents = 2;
    plan.timeline = {100, 1.0};
    plan.assignments = {{{0, 50}, 1, 0}, {{50, 100}, 2, 0}};
    return plan;
}

// Identity plan: the whole timeline to one agent.
inline parex::ParallelPlan fix_b() {
    parex::ParallelPlan plan;
    plan.n_agents = 1;
    plan.timeline = {100, 1.0};
    plan.assignments = {{{0, 100}, 1, 0}};
    return plan;
}

inline parex::Trajectory static_trajectory(parex::FrameIndex frames, double x = 0.0,
                                           double y = 0.0, double yaw = 0.0) {
    std::vector<parex::PoseSample> samples;
    for (parex::FrameIndex f = 0; f < frames; ++f) {
        samples.push_back({f, x, y, 0.0, yaw});
    }
    return parex::Trajectory::from_samples(std::move(samples));
}

// First half parked at (0,0), second half at (3,0): far apart under any yaw.
inline parex::Trajectory two_spot_trajectory(parex::FrameIndex frames = 100,
                                             parex::FrameIndex split = 50) {
    std::vector<parex::PoseSample> samples;
    for (parex::FrameIndex f = 0; f < frames; ++f) {
        samples.push_back({f, f < split ? 0.0 : 3.0, 0.0, 0.0, 0.0});
    }
    return parex::Trajectory::from_samples(std::move(samples));
}

}  // namespace fixtures
