#pragma once

#include "parex/annotations.hpp"
#include "parex/core.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace parex {

struct VerbObjectCue {
    std::string verb;
    std::string noun;
    FrameIndex source_start = 0;
};

/// An assignable unit of work on the source timeline. GT tasks carry a
/// single cue (the action's verb-noun); window tasks carry one cue per
/// action starting inside the window.
struct Task {
    Segment interval;
    FrameIndex duration = 0;         // always interval.length()
    std::set<std::string> objects;   // exclusive resources (track ids or nouns)
    std::string label;
    std::vector<VerbObjectCue> cues;
};

struct PrecedenceEdge {
    std::size_t before = 0;
    std::size_t after = 0;

    friend bool operator==(const PrecedenceEdge&, const PrecedenceEdge&) = default;
    friend auto operator<=>(const PrecedenceEdge&, const PrecedenceEdge&) = default;
};

struct PrecedenceGraph {
    std::size_t n_tasks = 0;
    std::vector<PrecedenceEdge> edges;
};

/// Verb-order rules: chains of verb classes plus class membership. One class
/// per chain may be the wildcard `*`, matching any verb not claimed by the
/// chain's other classes.
class PrecedenceRules {
public:
    struct Chain {
        std::vector<std::string> classes;
    };

    /// take/pick-up/get -> use(*) -> put/place/put-down; open -> close.
    static PrecedenceRules defaults();

    /// Plain text: chain lines `a -> b [-> c]`, class lines `a: v1, v2` or
    /// `a: *`; '#' comments. Throws ParseError on duplicate verbs within a
    /// chain, repeated classes in a chain, or undefined classes.
    static PrecedenceRules parse(std::istream& in);

    const std::vector<Chain>& chains() const { return chains_; }

    /// Position of the verb within a chain, wildcard included; empty when
    /// the chain does not mention it.
    std::optional<std::size_t> classify(std::size_t chain_index,
                                        const std::string& verb) const;

private:
    void validate() const;

    std::vector<Chain> chains_;
    std::map<std::string, std::vector<std::string>> class_verbs_;
    std::set<std::string> wildcard_classes_;
};

/// Cuts the timeline into n contiguous near-equal chunks (earlier chunks take
/// the remainder), chunk k to agent k, all starting at plan frame 0. Agents
/// beyond the frame count receive nothing.
ParallelPlan naive_split(const Timeline& timeline, int n_agents);

/// One task per action; objects are the ids of tracks overlapping the action
/// interval, falling back to the action's noun when none overlaps.
std::vector<Task> tasks_from_gt(const std::vector<ActionRecord>& actions,
                                const ObjectTrackSet& tracks);

/// Fixed windows partitioning the timeline (last window may be short). Each
/// window's objects are the nouns of actions starting inside it; its label
/// concatenates their narrations.
std::vector<Task> tasks_from_windows(const std::vector<ActionRecord>& actions,
                                     const Timeline& timeline, FrameIndex window_frames);

/// For each noun and each rule chain, links cue occurrences in source-time
/// order along the chain: every earlier-class cue gets an edge to the nearest
/// later-class cue that follows it. Acyclic by construction.
PrecedenceGraph induce_precedences(const std::vector<Task>& tasks,
                                   const PrecedenceRules& rules);

/// Greedy list scheduling: repeatedly take the ready task with the earliest
/// source start (tie: lower index) and place it at the earliest plan time
/// after its predecessors at which an agent is free and all its objects are
/// unheld; the agent giving the earliest start wins (tie: lower index).
/// Requires pairwise-disjoint task intervals and an acyclic graph.
ParallelPlan list_schedule(const std::vector<Task>& tasks, const PrecedenceGraph& graph,
                           int n_agents, const Timeline& timeline);

/// tasks_from_gt -> induce_precedences -> list_schedule.
ParallelPlan heft_gt(const AnnotationSet& annotations, int n_agents,
                     const PrecedenceRules& rules = PrecedenceRules::defaults());

/// tasks_from_windows -> induce_precedences -> list_schedule.
/// window_frames <= 0 selects the default of 60 seconds at the timeline fps.
ParallelPlan heft_window(const AnnotationSet& annotations, int n_agents,
                         FrameIndex window_frames = 0,
                         const PrecedenceRules& rules = PrecedenceRules::defaults());

}  // namespace parex
