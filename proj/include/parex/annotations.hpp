#pragma once

#include "parex/core.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parex {

/// Parse/validation failure in an input document, with a 1-based line number
/// (0 when the error is not tied to a line).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

struct ActionRecord {
    Segment interval;
    std::string narration;
    std::string verb;
    std::string noun;
};

struct PoseSample {
    FrameIndex frame = 0;
    double x = 0.0, y = 0.0, z = 0.0;  // meters, world coordinates
    double yaw = 0.0;                  // radians, heading in the XY plane
};

/// Per-source-frame camera pose of the original actor. Frames without a
/// sample are absent; no interpolation.
class Trajectory {
public:
    Trajectory() = default;

    /// Samples must be sorted by frame, strictly increasing, finite.
    static Trajectory from_samples(std::vector<PoseSample> samples);

    /// One past the highest sampled frame; 0 when empty.
    FrameIndex length() const { return static_cast<FrameIndex>(index_.size()); }
    std::size_t sample_count() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    bool has(FrameIndex frame) const;
    std::optional<PoseSample> at(FrameIndex frame) const;

    /// Present samples in frame order.
    const std::vector<PoseSample>& samples() const { return samples_; }

private:
    std::vector<PoseSample> samples_;
    std::vector<std::int32_t> index_;  // frame -> samples_ position, -1 if absent
};

struct ObjectTrackSet {
    /// object id -> disjoint motion/use intervals sorted by start
    std::map<std::string, std::vector<Segment>> tracks;
};

enum class CausalKind { PrepStep, StepStep };

const char* to_string(CausalKind kind);

struct CausalPair {
    Segment cause;
    Segment effect;
    CausalKind kind = CausalKind::PrepStep;
};

/// Everything the evaluators consume besides poses.
struct AnnotationSet {
    Timeline timeline;
    std::vector<ActionRecord> actions;
    ObjectTrackSet tracks;
    std::vector<CausalPair> causal_pairs;
};

// CSV loaders. All expect an exact header row, UTF-8, '\n' line endings with
// optional '\r', double-quote quoting for fields containing commas. Interval
// columns are half-open [start_frame, stop_frame).

/// Header: start_frame,stop_frame,narration,verb,noun
std::vector<ActionRecord> load_actions(std::istream& in);

/// Header: frame,x,y,z,yaw — frames strictly ascending, gaps allowed.
Trajectory load_poses(std::istream& in);

/// Header: object_id,start_frame,stop_frame — intervals of one object must
/// not overlap.
ObjectTrackSet load_object_tracks(std::istream& in);

/// Header: kind,cause_start,cause_end,effect_start,effect_end with kind in
/// {prep-step, step-step}; requires cause_end <= effect_start.
std::vector<CausalPair> load_causal_pairs(std::istream& in);

/// Plan interchange document (JSON): video_id, fps, length_frames, n_agents,
/// assignments[] of {agent, source_start, source_end, plan_start}.
struct LoadedPlan {
    ParallelPlan plan;
    std::string video_id;
    ValidationReport report;  // attached; an invalid plan still loads
};

LoadedPlan load_plan(std::istream& in);

void save_plan(const ParallelPlan& plan, std::ostream& out, const std::string& video_id = "");

}  // namespace parex
