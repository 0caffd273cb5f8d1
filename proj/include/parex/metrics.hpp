#pragma once

#include "parex/annotations.hpp"
#include "parex/core.hpp"
#include "parex/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace parex {

/// How an action counts as covered.
///   AgentFraction (default): some single agent's assigned frames contain at
///   least half of the action's frames.
///   SegmentIou: some assigned segment has temporal IoU >= 0.5 with the
///   action (the literal per-segment reading, kept for comparison).
enum class CoverageVariant { AgentFraction, SegmentIou };

struct CvrBreakdown {
    std::int64_t prep_reverse = 0;
    std::int64_t prep_miss = 0;
    std::int64_t step_reverse = 0;
    std::int64_t step_miss = 0;

    std::int64_t total() const { return prep_reverse + prep_miss + step_reverse + step_miss; }

    friend bool operator==(const CvrBreakdown&, const CvrBreakdown&) = default;
};

struct AgentStats {
    int agent = 0;
    double walking_m = 0.0;
    std::int64_t busy_frames = 0;
};

struct MetricFlags {
    bool actions_empty = false;
    bool pairs_empty = false;
    std::int64_t collision_frames_missing_pose = 0;  // plan frames dropped from the rate
    std::int64_t jump_legs_missing_pose = 0;         // jump legs dropped for lack of a pose
};

/// One video's evaluation row plus the violation breakdown and per-agent
/// workload stats.
struct MetricReport {
    std::string video_id;
    int n_agents = 1;
    double frame_coverage = 0.0;
    double action_coverage = 0.0;
    double speed_up = 0.0;
    double collision_rate = 0.0;
    double jump_m = 0.0;
    double ocr = 0.0;
    double cvr = 0.0;
    CvrBreakdown cvr_breakdown;
    std::vector<AgentStats> per_agent;
    MetricFlags flags;
};

/// Assigned source frames / timeline length. Assumes a valid plan.
double frame_coverage(const ParallelPlan& plan);

/// Fraction of actions covered under the chosen variant. An empty action
/// list is defined as 1.0 (flagged by evaluate_all).
double action_coverage(const ParallelPlan& plan, const std::vector<ActionRecord>& actions,
                       CoverageVariant variant = CoverageVariant::AgentFraction);

/// Assigned source frames / makespan. Throws std::invalid_argument on an
/// empty plan (undefined ratio).
double speed_up(const ParallelPlan& plan);

struct CollisionResult {
    double rate = 0.0;
    std::int64_t colliding_frames = 0;
    std::int64_t counted_frames = 0;       // makespan minus dropped frames
    std::int64_t missing_pose_frames = 0;  // dropped: an active agent had no pose
};

/// Fraction of plan frames where two active agents' transported body boxes
/// overlap. Plan frames where any active agent lacks a pose are excluded
/// from both numerator and denominator and counted in missing_pose_frames.
CollisionResult collision_rate(const ParallelPlan& plan, const Trajectory& traj,
                               const BodyBox& box = {});

struct JumpResult {
    double mean_m = 0.0;
    std::int64_t legs_missing_pose = 0;
};

/// Average between-segment relocation distance. Per agent: segments in plan
/// order, XY distance from each segment's final-frame pose to the next
/// segment's first-frame pose, summed and divided by the agent's segment
/// count; averaged over agents that have at least one segment.
JumpResult jump_distance(const ParallelPlan& plan, const Trajectory& traj);

/// Fraction of plan frames at which some object instance sits inside two
/// different agents' transported track intervals.
double object_conflict_rate(const ParallelPlan& plan, const ObjectTrackSet& tracks);

struct CvrResult {
    double rate = 0.0;
    CvrBreakdown breakdown;
    bool pairs_empty = false;
};

/// A pair is violated when the cause is missing from the plan (under half of
/// its frames assigned) or when both sides are present and the cause's plan
/// end exceeds the effect's plan start (reversal or parallel overlap). A
/// present cause with an absent effect is satisfied.
CvrResult causality_violation_rate(const ParallelPlan& plan,
                                   const std::vector<CausalPair>& pairs);

struct EvaluateOptions {
    CoverageVariant coverage_variant = CoverageVariant::AgentFraction;
    BodyBox body_box{};
    std::string video_id;
};

/// Runs the whole suite. Throws std::invalid_argument citing the violation
/// report when the plan is invalid; partial reports are never produced.
MetricReport evaluate_all(const ParallelPlan& plan, const AnnotationSet& annotations,
                          const Trajectory& traj, const EvaluateOptions& options = {});

struct MetricSummary {
    int n_reports = 0;
    int n_cvr_reports = 0;  // reports whose causal pair list was non-empty
    double frame_coverage = 0.0;
    double action_coverage = 0.0;
    double speed_up = 0.0;
    double collision_rate = 0.0;
    double jump_m = 0.0;
    double ocr = 0.0;
    double cvr = 0.0;  // averaged over the n_cvr_reports subset
    CvrBreakdown breakdown_totals;
};

/// Per-metric arithmetic mean over videos; CVR averages only reports whose
/// pair list was non-empty. Throws std::invalid_argument on an empty list.
MetricSummary aggregate(const std::vector<MetricReport>& reports);

// Report documents: JSON for machine use, a fixed-width table (percent
// fields scaled x100, two decimals) for humans.
std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(std::istream& in);
std::string summary_to_json(const MetricSummary& summary);
std::string render_table(const MetricReport& report);
std::string render_table(const MetricSummary& summary);

}  // namespace parex
