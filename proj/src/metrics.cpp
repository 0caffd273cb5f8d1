#include "parex/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <stdexcept>

namespace parex {

namespace {

std::int64_t assigned_frame_count(const ParallelPlan& plan) {
    std::int64_t total = 0;
    for (const Assignment& a : plan.assignments) total += a.segment.length();
    return total;
}

}  // namespace

double frame_coverage(const ParallelPlan& plan) {
    return static_cast<double>(assigned_frame_count(plan)) /
           static_cast<double>(plan.timeline.length_frames);
}

double action_coverage(const ParallelPlan& plan, const std::vector<ActionRecord>& actions,
                       CoverageVariant variant) {
    if (actions.empty()) return 1.0;
    std::int64_t covered = 0;
    for (const ActionRecord& action : actions) {
        const FrameIndex action_len = action.interval.length();
        bool hit = false;
        if (variant == CoverageVariant::AgentFraction) {
            std::vector<FrameIndex> per_agent(static_cast<std::size_t>(plan.n_agents), 0);
            for (const Assignment& a : plan.assignments) {
                per_agent[static_cast<std::size_t>(a.agent - 1)] +=
                    overlap_length(a.segment, action.interval);
            }
            for (const FrameIndex frames : per_agent) {
                if (2 * frames >= action_len) {
                    hit = true;
                    break;
                }
            }
        } else {
            for (const Assignment& a : plan.assignments) {
                const FrameIndex inter = overlap_length(a.segment, action.interval);
                const FrameIndex uni = a.segment.length() + action_len - inter;
                if (2 * inter >= uni) {
                    hit = true;
                    break;
                }
            }
        }
        if (hit) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(actions.size());
}

double speed_up(const ParallelPlan& plan) {
    if (plan.assignments.empty()) {
        throw std::invalid_argument("speed_up: undefined for an empty plan");
    }
    FrameIndex makespan = 0;
    for (const Assignment& a : plan.assignments) makespan = std::max(makespan, a.plan_end());
    return static_cast<double>(assigned_frame_count(plan)) / static_cast<double>(makespan);
}

CollisionResult collision_rate(const ParallelPlan& plan, const Trajectory& traj,
                               const BodyBox& box) {
    const PlanIndex index(plan);
    const FrameIndex makespan = index.makespan();
    CollisionResult result;

    // Per-agent cursor over assignments sorted by plan start.
    std::vector<std::size_t> cursor(static_cast<std::size_t>(plan.n_agents), 0);
    std::vector<PoseSample> active;
    active.reserve(static_cast<std::size_t>(plan.n_agents));
    for (FrameIndex t = 0; t < makespan; ++t) {
        active.clear();
        bool missing = false;
        for (int agent = 1; agent <= plan.n_agents; ++agent) {
            const auto& list = index.agent_assignments(agent);
            std::size_t& c = cursor[static_cast<std::size_t>(agent - 1)];
            while (c < list.size() && list[c].plan_end() <= t) ++c;
            if (c >= list.size() || list[c].plan_start > t) continue;  // idle
            const FrameIndex source = list[c].segment.start + (t - list[c].plan_start);
            const auto pose = traj.at(source);
            if (!pose) {
                missing = true;
                break;
            }
            active.push_back(*pose);
        }
        if (missing) {
            ++result.missing_pose_frames;
            continue;
        }
        ++result.counted_frames;
        bool collide = false;
        for (std::size_t i = 0; i < active.size() && !collide; ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                if (is_collide(active[i], active[j], box)) {
                    collide = true;
                    break;
                }
            }
        }
        if (collide) ++result.colliding_frames;
    }
    result.rate = result.counted_frames > 0
                      ? static_cast<double>(result.colliding_frames) /
                            static_cast<double>(result.counted_frames)
                      : 0.0;
    return result;
}

JumpResult jump_distance(const ParallelPlan& plan, const Trajectory& traj) {
    const PlanIndex index(plan);
    JumpResult result;
    double sum_over_agents = 0.0;
    int agents_with_work = 0;
    for (int agent = 1; agent <= plan.n_agents; ++agent) {
        const auto& segs = index.agent_assignments(agent);
        if (segs.empty()) continue;
        ++agents_with_work;
        double jumps = 0.0;
        for (std::size_t m = 0; m + 1 < segs.size(); ++m) {
            const auto from = traj.at(segs[m].segment.end - 1);
            const auto to = traj.at(segs[m + 1].segment.start);
            if (!from || !to) {
                ++result.legs_missing_pose;
                continue;
            }
            jumps += std::hypot(to->x - from->x, to->y - from->y);
        }
        sum_over_agents += jumps / static_cast<double>(segs.size());
    }
    result.mean_m = agents_with_work > 0 ? sum_over_agents / agents_with_work : 0.0;
    return result;
}

double object_conflict_rate(const ParallelPlan& plan, const ObjectTrackSet& tracks) {
    FrameIndex makespan = 0;
    for (const Assignment& a : plan.assignments) makespan = std::max(makespan, a.plan_end());
    if (makespan == 0) return 0.0;

    std::vector<std::int32_t> conflict_delta(static_cast<std::size_t>(makespan) + 1, 0);
    bool any = false;

    struct Piece {
        int agent;
        FrameIndex lo, hi;  // plan frames [lo, hi)
    };
    std::vector<Piece> pieces;
    for (const auto& [id, intervals] : tracks.tracks) {
        pieces.clear();
        for (const Segment& interval : intervals) {
            for (const Assignment& a : plan.assignments) {
                const FrameIndex lo = std::max(interval.start, a.segment.start);
                const FrameIndex hi = std::min(interval.end, a.segment.end);
                if (hi <= lo) continue;
                pieces.push_back({a.agent, a.plan_start + (lo - a.segment.start),
                                  a.plan_start + (hi - a.segment.start)});
            }
        }
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            for (std::size_t j = i + 1; j < pieces.size(); ++j) {
                if (pieces[i].agent == pieces[j].agent) continue;
                const FrameIndex lo = std::max(pieces[i].lo, pieces[j].lo);
                const FrameIndex hi = std::min(pieces[i].hi, pieces[j].hi);
                if (hi <= lo) continue;
                ++conflict_delta[static_cast<std::size_t>(lo)];
                --conflict_delta[static_cast<std::size_t>(hi)];
                any = true;
            }
        }
    }
    if (!any) return 0.0;
    std::int64_t conflicted = 0;
    std::int32_t depth = 0;
    for (FrameIndex t = 0; t < makespan; ++t) {
        depth += conflict_delta[static_cast<std::size_t>(t)];
        if (depth > 0) ++conflicted;
    }
    return static_cast<double>(conflicted) / static_cast<double>(makespan);
}

namespace {

struct TransportedInterval {
    bool present = false;        // at least half of the frames assigned
    FrameIndex plan_min = 0;     // earliest plan frame of any assigned frame
    FrameIndex plan_end = 0;     // one past the latest plan frame
};

TransportedInterval transport(const ParallelPlan& plan, const Segment& interval) {
    TransportedInterval out;
    FrameIndex assigned = 0;
    FrameIndex plan_min = std::numeric_limits<FrameIndex>::max();
    FrameIndex plan_end = 0;
    for (const Assignment& a : plan.assignments) {
        const FrameIndex lo = std::max(interval.start, a.segment.start);
        const FrameIndex hi = std::min(interval.end, a.segment.end);
        if (hi <= lo) continue;
        assigned += hi - lo;
        plan_min = std::min(plan_min, a.plan_start + (lo - a.segment.start));
        plan_end = std::max(plan_end, a.plan_start + (hi - a.segment.start));
    }
    out.present = 2 * assigned >= interval.length();
    if (assigned > 0) {
        out.plan_min = plan_min;
        out.plan_end = plan_end;
    }
    return out;
}

}  // namespace

CvrResult causality_violation_rate(const ParallelPlan& plan,
                                   const std::vector<CausalPair>& pairs) {
    CvrResult result;
    if (pairs.empty()) {
        result.pairs_empty = true;
        return result;
    }
    std::int64_t violated = 0;
    for (const CausalPair& pair : pairs) {
        const TransportedInterval cause = transport(plan, pair.cause);
        const TransportedInterval effect = transport(plan, pair.effect);
        const bool prep = pair.kind == CausalKind::PrepStep;
        if (!cause.present) {
            ++violated;
            (prep ? result.breakdown.prep_miss : result.breakdown.step_miss) += 1;
        } else if (effect.present && cause.plan_end > effect.plan_min) {
            // reversal or parallel overlap
            ++violated;
            (prep ? result.breakdown.prep_reverse : result.breakdown.step_reverse) += 1;
        }
    }
    result.rate = static_cast<double>(violated) / static_cast<double>(pairs.size());
    return result;
}

MetricReport evaluate_all(const ParallelPlan& plan, const AnnotationSet& annotations,
                          const Trajectory& traj, const EvaluateOptions& options) {
    const ValidationReport validation = validate_plan(plan);
    if (!validation.ok()) {
        throw std::invalid_argument("evaluate_all: invalid plan\n" + validation.to_string());
    }

    MetricReport report;
    report.video_id = options.video_id;
    report.n_agents = plan.n_agents;
    report.frame_coverage = frame_coverage(plan);
    report.action_coverage =
        action_coverage(plan, annotations.actions, options.coverage_variant);
    report.speed_up = speed_up(plan);

    const CollisionResult collision = collision_rate(plan, traj, options.body_box);
    report.collision_rate = collision.rate;
    report.flags.collision_frames_missing_pose = collision.missing_pose_frames;

    const JumpResult jump = jump_distance(plan, traj);
    report.jump_m = jump.mean_m;
    report.flags.jump_legs_missing_pose = jump.legs_missing_pose;

    report.ocr = object_conflict_rate(plan, annotations.tracks);

    const CvrResult cvr = causality_violation_rate(plan, annotations.causal_pairs);
    report.cvr = cvr.rate;
    report.cvr_breakdown = cvr.breakdown;
    report.flags.pairs_empty = cvr.pairs_empty;
    report.flags.actions_empty = annotations.actions.empty();

    const PlanIndex index(plan);
    for (int agent = 1; agent <= plan.n_agents; ++agent) {
        AgentStats stats;
        stats.agent = agent;
        std::vector<FrameIndex> frames;
        for (const Assignment& a : index.agent_assignments(agent)) {
            stats.busy_frames += a.segment.length();
            for (FrameIndex t = a.segment.start; t < a.segment.end; ++t) {
                frames.push_back(t);
            }
        }
        stats.walking_m = walking_distance(traj, std::move(frames));
        report.per_agent.push_back(stats);
    }
    return report;
}

MetricSummary aggregate(const std::vector<MetricReport>& reports) {
    if (reports.empty()) {
        throw std::invalid_argument("aggregate: empty report list");
    }
    MetricSummary summary;
    summary.n_reports = static_cast<int>(reports.size());
    double cvr_sum = 0.0;
    for (const MetricReport& r : reports) {
        summary.frame_coverage += r.frame_coverage;
        summary.action_coverage += r.action_coverage;
        summary.speed_up += r.speed_up;
        summary.collision_rate += r.collision_rate;
        summary.jump_m += r.jump_m;
        summary.ocr += r.ocr;
        summary.breakdown_totals.prep_reverse += r.cvr_breakdown.prep_reverse;
        summary.breakdown_totals.prep_miss += r.cvr_breakdown.prep_miss;
        summary.breakdown_totals.step_reverse += r.cvr_breakdown.step_reverse;
        summary.breakdown_totals.step_miss += r.cvr_breakdown.step_miss;
        if (!r.flags.pairs_empty) {
            ++summary.n_cvr_reports;
            cvr_sum += r.cvr;
        }
    }
    const double n = static_cast<double>(summary.n_reports);
    summary.frame_coverage /= n;
    summary.action_coverage /= n;
    summary.speed_up /= n;
    summary.collision_rate /= n;
    summary.jump_m /= n;
    summary.ocr /= n;
    summary.cvr = summary.n_cvr_reports > 0 ? cvr_sum / summary.n_cvr_reports : 0.0;
    return summary;
}

namespace {

using nlohmann::ordered_json;

ordered_json breakdown_to_json(const CvrBreakdown& b) {
    return ordered_json{{"prep_step", {{"reverse", b.prep_reverse}, {"miss", b.prep_miss}}},
                        {"step_step", {{"reverse", b.step_reverse}, {"miss", b.step_miss}}}};
}

CvrBreakdown breakdown_from_json(const nlohmann::json& j) {
    CvrBreakdown b;
    b.prep_reverse = j.at("prep_step").at("reverse").get<std::int64_t>();
    b.prep_miss = j.at("prep_step").at("miss").get<std::int64_t>();
    b.step_reverse = j.at("step_step").at("reverse").get<std::int64_t>();
    b.step_miss = j.at("step_step").at("miss").get<std::int64_t>();
    return b;
}

std::string two_decimals(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string table_header_and_row(double coverage, double action_cov, double speedup,
                                 double collision, double jump, double ocr, double cvr) {
    const char* headers[] = {"Coverage (%)", "Action Cov. (%)", "Speed-Up",
                             "Coll. Rate (%)", "Jump (m)", "OCR (%)", "CVR (%)"};
    const std::string cells[] = {
        two_decimals(coverage * 100.0), two_decimals(action_cov * 100.0),
        two_decimals(speedup),          two_decimals(collision * 100.0),
        two_decimals(jump),             two_decimals(ocr * 100.0),
        two_decimals(cvr * 100.0)};
    std::string head, row;
    for (int i = 0; i < 7; ++i) {
        const std::size_t width = std::max(std::string(headers[i]).size(), cells[i].size());
        if (i) {
            head += "  ";
            row += "  ";
        }
        head += std::string(width - std::string(headers[i]).size(), ' ') + headers[i];
        row += std::string(width - cells[i].size(), ' ') + cells[i];
    }
    return head + "\n" + row + "\n";
}

std::string breakdown_block(const CvrBreakdown& b) {
    std::string out = "Causal violations (reverse/miss):\n";
    out += "  prep-step: " + std::to_string(b.prep_reverse) + "/" + std::to_string(b.prep_miss);
    out += "  step-step: " + std::to_string(b.step_reverse) + "/" + std::to_string(b.step_miss);
    out += "  total: " + std::to_string(b.total()) + "\n";
    return out;
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
    ordered_json doc;
    doc["video_id"] = report.video_id;
    doc["n_agents"] = report.n_agents;
    doc["frame_coverage"] = report.frame_coverage;
    doc["action_coverage"] = report.action_coverage;
    doc["speed_up"] = report.speed_up;
    doc["collision_rate"] = report.collision_rate;
    doc["jump_m"] = report.jump_m;
    doc["ocr"] = report.ocr;
    doc["cvr"] = report.cvr;
    doc["cvr_breakdown"] = breakdown_to_json(report.cvr_breakdown);
    doc["per_agent"] = ordered_json::array();
    for (const AgentStats& s : report.per_agent) {
        doc["per_agent"].push_back({{"agent", s.agent},
                                    {"walking_m", s.walking_m},
                                    {"busy_frames", s.busy_frames}});
    }
    doc["flags"] = {
        {"actions_empty", report.flags.actions_empty},
        {"pairs_empty", report.flags.pairs_empty},
        {"collision_frames_missing_pose", report.flags.collision_frames_missing_pose},
        {"jump_legs_missing_pose", report.flags.jump_legs_missing_pose}};
    return doc.dump(2) + "\n";
}

MetricReport report_from_json(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report document: ") + e.what(), 0);
    }
    MetricReport report;
    try {
        report.video_id = doc.value("video_id", std::string{});
        report.n_agents = doc.at("n_agents").get<int>();
        report.frame_coverage = doc.at("frame_coverage").get<double>();
        report.action_coverage = doc.at("action_coverage").get<double>();
        report.speed_up = doc.at("speed_up").get<double>();
        report.collision_rate = doc.at("collision_rate").get<double>();
        report.jump_m = doc.at("jump_m").get<double>();
        report.ocr = doc.at("ocr").get<double>();
        report.cvr = doc.at("cvr").get<double>();
        report.cvr_breakdown = breakdown_from_json(doc.at("cvr_breakdown"));
        for (const auto& entry : doc.value("per_agent", nlohmann::json::array())) {
            report.per_agent.push_back({entry.at("agent").get<int>(),
                                        entry.at("walking_m").get<double>(),
                                        entry.at("busy_frames").get<std::int64_t>()});
        }
        const auto& flags = doc.at("flags");
        report.flags.actions_empty = flags.at("actions_empty").get<bool>();
        report.flags.pairs_empty = flags.at("pairs_empty").get<bool>();
        report.flags.collision_frames_missing_pose =
            flags.at("collision_frames_missing_pose").get<std::int64_t>();
        report.flags.jump_legs_missing_pose =
            flags.at("jump_legs_missing_pose").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report document: ") + e.what(), 0);
    }
    return report;
}

std::string summary_to_json(const MetricSummary& summary) {
    ordered_json doc;
    doc["n_reports"] = summary.n_reports;
    doc["n_cvr_reports"] = summary.n_cvr_reports;
    doc["frame_coverage"] = summary.frame_coverage;
    doc["action_coverage"] = summary.action_coverage;
    doc["speed_up"] = summary.speed_up;
    doc["collision_rate"] = summary.collision_rate;
    doc["jump_m"] = summary.jump_m;
    doc["ocr"] = summary.ocr;
    doc["cvr"] = summary.cvr;
    doc["cvr_breakdown_totals"] = breakdown_to_json(summary.breakdown_totals);
    return doc.dump(2) + "\n";
}

std::string render_table(const MetricReport& report) {
    std::string out = table_header_and_row(report.frame_coverage, report.action_coverage,
                                           report.speed_up, report.collision_rate,
                                           report.jump_m, report.ocr, report.cvr);
    out += breakdown_block(report.cvr_breakdown);
    return out;
}

std::string render_table(const MetricSummary& summary) {
    std::string out = "Mean over " + std::to_string(summary.n_reports) + " video(s); CVR over " +
                      std::to_string(summary.n_cvr_reports) + " with causal pairs\n";
    out += table_header_and_row(summary.frame_coverage, summary.action_coverage,
                                summary.speed_up, summary.collision_rate, summary.jump_m,
                                summary.ocr, summary.cvr);
    out += breakdown_block(summary.breakdown_totals);
    return out;
}

}  // namespace parex
