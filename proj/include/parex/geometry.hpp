#pragma once

#include "parex/annotations.hpp"
#include "parex/core.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace parex {

/// Footprint of one agent on the ground plane, oriented by the pose yaw:
/// depth extends along the heading, width across it.
struct BodyBox {
    double width = 0.46;
    double depth = 0.25;
};

/// True iff the two oriented body rectangles overlap in the XY plane,
/// decided by the separating-axis test on the four candidate axes.
/// Touching boundaries count as a collision. z is ignored.
bool is_collide(const PoseSample& a, const PoseSample& b, const BodyBox& box = {});

/// Pose the agent would have at a plan frame: the source pose transported
/// through its active assignment. Empty when the agent is idle or the source
/// pose is absent. Throws std::invalid_argument for an unknown agent.
std::optional<PoseSample> agent_pose_at(const ParallelPlan& plan, const Trajectory& traj,
                                        int agent, FrameIndex plan_frame);

struct ZoneTriplet {
    FrameIndex start = 0;  // half-open [start, end) of source frames
    FrameIndex end = 0;
    int zone = 0;

    friend bool operator==(const ZoneTriplet&, const ZoneTriplet&) = default;
};

struct GridGeometry {
    double anchor_x = 0.0;  // trajectory min corner
    double anchor_y = 0.0;
    double cell_size = 1.2;  // meters
};

struct MixtureComponent {
    double weight = 0.0;
    double mean_x = 0.0, mean_y = 0.0;
    double cov_xx = 0.0, cov_xy = 0.0, cov_yy = 0.0;
};

struct MixtureGeometry {
    unsigned seed = 0;
    int max_iters = 0;
    std::vector<MixtureComponent> components;
};

/// (start, end, zone) runs partitioning the pose-bearing frames of one
/// trajectory. Temporally adjacent triplets always change zone; a sampling
/// gap ends a run, so triplets separated by a gap may repeat a zone id.
struct ZoneOccupancy {
    std::vector<ZoneTriplet> triplets;
    std::variant<GridGeometry, MixtureGeometry> geometry;
};

/// Partitions the XY plane into axis-aligned squares anchored at the
/// trajectory's minimum corner; zone ids in first-appearance order from 0.
/// Throws std::invalid_argument on an empty trajectory.
ZoneOccupancy grid_zones(const Trajectory& traj, double cell_size);

/// Clusters the XY point cloud with a k-component Gaussian mixture fitted by
/// EM (seeded k-means++ initialization, fixed iteration cap, covariance floor
/// 1e-6 m^2); frames take the argmax-responsibility component. Deterministic
/// given (seed, max_iters). Throws std::invalid_argument when the trajectory
/// has fewer than k distinct XY points.
ZoneOccupancy gmm_zones(const Trajectory& traj, int k, unsigned seed = 0, int max_iters = 100);

/// Sum of XY displacements between consecutive frames within each contiguous
/// run of the given source frames; gaps between runs contribute nothing.
/// `frames` is treated as a set (sorted and deduplicated internally).
double walking_distance(const Trajectory& traj, std::vector<FrameIndex> frames);

}  // namespace parex
