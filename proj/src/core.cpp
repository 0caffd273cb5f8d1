#include "parex/core.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace parex {

FrameIndex overlap_length(const Segment& a, const Segment& b) {
    const FrameIndex lo = std::max(a.start, b.start);
    const FrameIndex hi = std::min(a.end, b.end);
    return hi > lo ? hi - lo : 0;
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::MalformedSegment: return "malformed-segment";
        case ViolationKind::AgentOutOfRange: return "agent-out-of-range";
        case ViolationKind::NegativePlanStart: return "negative-plan-start";
        case ViolationKind::SourceOverlap: return "source-overlap";
        case ViolationKind::DuplicateSegment: return "duplicate-segment";
        case ViolationKind::AgentPlanOverlap: return "agent-plan-overlap";
    }
    return "unknown";
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const Violation& v : violations) {
        out << parex::to_string(v.kind) << " [";
        for (std::size_t i = 0; i < v.assignments.size(); ++i) {
            if (i) out << ",";
            out << v.assignments[i];
        }
        out << "] " << v.detail << "\n";
    }
    return out.str();
}

namespace {

std::string segment_str(const Segment& s) {
    return "[" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

}  // namespace

ValidationReport validate_plan(const ParallelPlan& plan) {
    ValidationReport report;
    const FrameIndex limit = plan.timeline.length_frames;

    for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
        const Assignment& a = plan.assignments[i];
        if (!a.segment.well_formed() || a.segment.end > limit) {
            report.violations.push_back({ViolationKind::MalformedSegment, {i},
                                         "segment " + segment_str(a.segment) +
                                             " outside timeline of " + std::to_string(limit)});
        }
        if (a.agent < 1 || a.agent > plan.n_agents) {
            report.violations.push_back({ViolationKind::AgentOutOfRange, {i},
                                         "agent " + std::to_string(a.agent) + " with n_agents " +
                                             std::to_string(plan.n_agents)});
        }
        if (a.plan_start < 0) {
            report.violations.push_back({ViolationKind::NegativePlanStart, {i},
                                         "plan_start " + std::to_string(a.plan_start)});
        }
    }

    // Pairwise source overlap: sweep assignments in source order.
    std::vector<std::size_t> order(plan.assignments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const Segment& a = plan.assignments[x].segment;
        const Segment& b = plan.assignments[y].segment;
        return a.start != b.start ? a.start < b.start : x < y;
    });
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        for (std::size_t m = k + 1; m < order.size(); ++m) {
            const Segment& a = plan.assignments[order[k]].segment;
            const Segment& b = plan.assignments[order[m]].segment;
            if (b.start >= a.end) break;
            std::vector<std::size_t> pair{std::min(order[k], order[m]),
                                          std::max(order[k], order[m])};
            if (a == b) {
                report.violations.push_back({ViolationKind::DuplicateSegment, pair,
                                             "segment " + segment_str(a) + " assigned twice"});
            } else {
                report.violations.push_back({ViolationKind::SourceOverlap, pair,
                                             "segments " + segment_str(a) + " and " +
                                                 segment_str(b) + " share source frames"});
            }
        }
    }

    // Per-agent plan overlap: sweep each agent's assignments in plan order.
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const Assignment& a = plan.assignments[x];
        const Assignment& b = plan.assignments[y];
        if (a.agent != b.agent) return a.agent < b.agent;
        return a.plan_start != b.plan_start ? a.plan_start < b.plan_start : x < y;
    });
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        for (std::size_t m = k + 1; m < order.size(); ++m) {
            const Assignment& a = plan.assignments[order[k]];
            const Assignment& b = plan.assignments[order[m]];
            if (a.agent != b.agent || b.plan_start >= a.plan_end()) break;
            report.violations.push_back(
                {ViolationKind::AgentPlanOverlap,
                 {std::min(order[k], order[m]), std::max(order[k], order[m])},
                 "agent " + std::to_string(a.agent) + " busy twice at plan frame " +
                     std::to_string(b.plan_start)});
        }
    }

    return report;
}

FrameIndex plan_makespan(const ParallelPlan& plan) {
    const ValidationReport report = validate_plan(plan);
    if (!report.ok()) {
        throw std::invalid_argument("plan_makespan: invalid plan\n" + report.to_string());
    }
    FrameIndex makespan = 0;
    for (const Assignment& a : plan.assignments) {
        makespan = std::max(makespan, a.plan_end());
    }
    return makespan;
}

std::vector<bool> assigned_mask(const ParallelPlan& plan) {
    std::vector<bool> mask(static_cast<std::size_t>(plan.timeline.length_frames), false);
    for (const Assignment& a : plan.assignments) {
        for (FrameIndex t = a.segment.start; t < a.segment.end; ++t) {
            mask[static_cast<std::size_t>(t)] = true;
        }
    }
    return mask;
}

std::optional<PlanLocation> map_source_to_plan(const ParallelPlan& plan, FrameIndex t) {
    if (t < 0 || t >= plan.timeline.length_frames) {
        throw std::out_of_range("map_source_to_plan: frame " + std::to_string(t) +
                                " outside timeline of " +
                                std::to_string(plan.timeline.length_frames));
    }
    return PlanIndex(plan).locate(t);
}

PlanIndex::PlanIndex(const ParallelPlan& plan) {
    by_source_ = plan.assignments;
    std::sort(by_source_.begin(), by_source_.end(),
              [](const Assignment& a, const Assignment& b) {
                  return a.segment.start < b.segment.start;
              });
    by_agent_.resize(static_cast<std::size_t>(std::max(plan.n_agents, 0)));
    for (const Assignment& a : plan.assignments) {
        by_agent_[static_cast<std::size_t>(a.agent - 1)].push_back(a);
        makespan_ = std::max(makespan_, a.plan_end());
    }
    for (auto& list : by_agent_) {
        std::sort(list.begin(), list.end(), [](const Assignment& a, const Assignment& b) {
            return a.plan_start < b.plan_start;
        });
    }
}

std::optional<PlanLocation> PlanIndex::locate(FrameIndex source_frame) const {
    auto it = std::upper_bound(by_source_.begin(), by_source_.end(), source_frame,
                               [](FrameIndex t, const Assignment& a) {
                                   return t < a.segment.start;
                               });
    if (it == by_source_.begin()) return std::nullopt;
    --it;
    if (!it->segment.contains(source_frame)) return std::nullopt;
    return PlanLocation{it->agent, it->plan_start + (source_frame - it->segment.start)};
}

std::optional<FrameIndex> PlanIndex::source_at(int agent, FrameIndex plan_frame) const {
    if (agent < 1 || agent > n_agents()) {
        throw std::invalid_argument("PlanIndex::source_at: unknown agent " +
                                    std::to_string(agent));
    }
    const auto& list = by_agent_[static_cast<std::size_t>(agent - 1)];
    auto it = std::upper_bound(list.begin(), list.end(), plan_frame,
                               [](FrameIndex t, const Assignment& a) {
                                   return t < a.plan_start;
                               });
    if (it == list.begin()) return std::nullopt;
    --it;
    if (plan_frame >= it->plan_end()) return std::nullopt;
    return it->segment.start + (plan_frame - it->plan_start);
}

const std::vector<Assignment>& PlanIndex::agent_assignments(int agent) const {
    if (agent < 1 || agent > n_agents()) {
        throw std::invalid_argument("PlanIndex::agent_assignments: unknown agent " +
                                    std::to_string(agent));
    }
    return by_agent_[static_cast<std::size_t>(agent - 1)];
}

}  // namespace parex
