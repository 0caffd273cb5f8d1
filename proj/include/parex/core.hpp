#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace parex {

using FrameIndex = std::int64_t;

/// Source video timeline: a frame count plus the sampling rate the frames
/// were taken at. All internal arithmetic is in integer frame indices;
/// seconds appear only at I/O boundaries.
struct Timeline {
    FrameIndex length_frames = 1;
    double fps = 1.0;
};

/// Half-open interval [start, end) of source-frame indices.
struct Segment {
    FrameIndex start = 0;
    FrameIndex end = 0;

    FrameIndex length() const { return end - start; }
    bool well_formed() const { return start >= 0 && start < end; }
    bool contains(FrameIndex t) const { return t >= start && t < end; }

    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Number of frames shared by two segments.
FrameIndex overlap_length(const Segment& a, const Segment& b);

/// One segment bound to one agent (1-based) at a plan-clock start frame.
/// The assignment occupies plan frames [plan_start, plan_start + length).
struct Assignment {
    Segment segment;
    int agent = 1;
    FrameIndex plan_start = 0;

    FrameIndex plan_end() const { return plan_start + segment.length(); }

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct ParallelPlan {
    int n_agents = 1;
    Timeline timeline;
    std::vector<Assignment> assignments;
};

enum class ViolationKind {
    MalformedSegment,   // start >= end or outside the timeline
    AgentOutOfRange,    // agent not in [1..n_agents]
    NegativePlanStart,
    SourceOverlap,      // two assignments share source frames
    DuplicateSegment,   // the same segment assigned twice
    AgentPlanOverlap,   // one agent busy with two segments at once
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::vector<std::size_t> assignments;  // offending assignment indices
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Checks every plan invariant and reports all violations found.
/// Violations are data, not failures; a valid plan yields an empty report.
ValidationReport validate_plan(const ParallelPlan& plan);

/// Finish time of the longest-working agent; 0 for an empty plan.
/// Throws std::invalid_argument if the plan fails validation.
FrameIndex plan_makespan(const ParallelPlan& plan);

/// mask[t] is true iff some assignment's segment contains source frame t.
/// Assumes a valid plan.
std::vector<bool> assigned_mask(const ParallelPlan& plan);

struct PlanLocation {
    int agent = 0;
    FrameIndex plan_frame = 0;

    friend bool operator==(const PlanLocation&, const PlanLocation&) = default;
};

/// Transports a source frame into the plan clock. Empty if the frame is not
/// assigned. Throws std::out_of_range for t outside the timeline.
std::optional<PlanLocation> map_source_to_plan(const ParallelPlan& plan, FrameIndex t);

/// Lookup structure over a valid plan: source frame -> (agent, plan frame)
/// and (agent, plan frame) -> source frame, both by binary search.
class PlanIndex {
public:
    explicit PlanIndex(const ParallelPlan& plan);

    std::optional<PlanLocation> locate(FrameIndex source_frame) const;

    /// Source frame the agent executes at plan_frame; empty when idle.
    std::optional<FrameIndex> source_at(int agent, FrameIndex plan_frame) const;

    /// Assignments of one agent ordered by plan start. agent is 1-based.
    const std::vector<Assignment>& agent_assignments(int agent) const;

    FrameIndex makespan() const { return makespan_; }
    int n_agents() const { return static_cast<int>(by_agent_.size()); }

private:
    std::vector<Assignment> by_source_;               // sorted by segment.start
    std::vector<std::vector<Assignment>> by_agent_;   // sorted by plan_start
    FrameIndex makespan_ = 0;
};

}  // namespace parex
