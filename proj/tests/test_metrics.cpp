#include "parex/metrics.hpp"

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace parex;

namespace {

AnnotationSet fix_a_annotations() {
    AnnotationSet set;
    set.timeline = {100, 1.0};
    set.actions = {{{20, 30}, "cut the carrot", "cut", "carrot"},
                   {{60, 70}, "wash the pan", "wash", "pan"}};
    set.tracks.tracks["o1"] = {{10, 20}, {60, 70}};
    set.causal_pairs = {{{10, 20}, {60, 70}, CausalKind::PrepStep}};
    return set;
}

}  // namespace

TEST_CASE("frame_coverage") {
    CHECK(frame_coverage(fixtures::fix_a()) == 1.0);

    ParallelPlan quarter;
    quarter.timeline = {100, 1.0};
    quarter.assignments = {{{0, 25}, 1, 0}};
    CHECK(frame_coverage(quarter) == 0.25);
}

TEST_CASE("action_coverage: fully contained and straddling actions") {
    const ParallelPlan plan = fixtures::fix_a();

    std::vector<ActionRecord> inside = {{{20, 30}, "", "cut", "carrot"}};
    CHECK(action_coverage(plan, inside) == 1.0);

    // exact 50/50 straddle: each agent holds half, counted once
    std::vector<ActionRecord> straddle = {{{45, 55}, "", "wash", "pan"}};
    CHECK(action_coverage(plan, straddle) == 1.0);

    ParallelPlan sparse;
    sparse.timeline = {100, 1.0};
    sparse.n_agents = 2;
    sparse.assignments = {{{0, 10}, 1, 0}};
    std::vector<ActionRecord> outside = {{{50, 60}, "", "wash", "pan"},
                                         {{80, 90}, "", "dry", "pan"}};
    CHECK(action_coverage(sparse, outside) == 0.0);
}

TEST_CASE("action_coverage: empty list defined as 1.0") {
    CHECK(action_coverage(fixtures::fix_a(), {}) == 1.0);
}

TEST_CASE("action_coverage: literal per-segment IoU variant differs") {
    const ParallelPlan plan = fixtures::fix_a();
    std::vector<ActionRecord> actions = {{{20, 30}, "", "cut", "carrot"}};
    // IoU([0,50), [20,30)) = 10/50 < 0.5, so the literal reading misses it
    CHECK(action_coverage(plan, actions, CoverageVariant::SegmentIou) == 0.0);
    CHECK(action_coverage(plan, actions, CoverageVariant::AgentFraction) == 1.0);

    std::vector<ActionRecord> long_action = {{{0, 60}, "", "cut", "carrot"}};
    // IoU([0,50), [0,60)) = 50/60 >= 0.5 under the literal reading
    CHECK(action_coverage(plan, long_action, CoverageVariant::SegmentIou) == 1.0);
}

TEST_CASE("speed_up") {
    CHECK(speed_up(fixtures::fix_a()) == 2.0);
    CHECK(speed_up(fixtures::fix_b()) == 1.0);

    ParallelPlan plan;
    plan.n_agents = 2;
    plan.timeline = {100, 1.0};
    plan.assignments = {{{0, 50}, 1, 0}, {{60, 70}, 2, 0}};  // 60 frames, makespan 50
    CHECK(speed_up(plan) == doctest::Approx(1.2));

    ParallelPlan empty;
    empty.timeline = {100, 1.0};
    CHECK_THROWS_AS(speed_up(empty), std::invalid_argument);
}

TEST_CASE("collision_rate: coincident poses always collide") {
    const CollisionResult result =
        collision_rate(fixtures::fix_a(), fixtures::static_trajectory(100));
    CHECK(result.rate == 1.0);
    CHECK(result.colliding_frames == 50);
    CHECK(result.counted_frames == 50);
    CHECK(result.missing_pose_frames == 0);
}

TEST_CASE("collision_rate: distant halves never collide") {
    const CollisionResult result =
        collision_rate(fixtures::fix_a(), fixtures::two_spot_trajectory());
    CHECK(result.rate == 0.0);
}

TEST_CASE("collision_rate: single agent has no pairs") {
    const CollisionResult result =
        collision_rate(fixtures::fix_b(), fixtures::static_trajectory(100));
    CHECK(result.rate == 0.0);
    CHECK(result.counted_frames == 100);
}

TEST_CASE("collision_rate: missing poses drop the frame and get flagged") {
    std::vector<PoseSample> samples;
    for (FrameIndex f = 0; f < 100; ++f) {
        if (f == 60) continue;  // P2's source frame at plan frame 10
        samples.push_back({f, 0.0, 0.0, 0.0, 0.0});
    }
    const Trajectory traj = Trajectory::from_samples(std::move(samples));
    const CollisionResult result = collision_rate(fixtures::fix_a(), traj);
    CHECK(result.missing_pose_frames == 1);
    CHECK(result.counted_frames == 49);
    CHECK(result.colliding_frames == 49);
    CHECK(result.rate == 1.0);
}

TEST_CASE("jump_distance: one segment per agent jumps nowhere") {
    const JumpResult result =
        jump_distance(fixtures::fix_a(), fixtures::static_trajectory(100));
    CHECK(result.mean_m == 0.0);
}

TEST_CASE("jump_distance: divisor is the segment count") {
    ParallelPlan plan;
    plan.n_agents = 2;
    plan.timeline = {100, 1.0};
    plan.assignments = {{{0, 10}, 1, 0}, {{20, 30}, 1, 10}, {{40, 50}, 2, 0}};

    std::vector<PoseSample> samples;
    for (FrameIndex f = 0; f < 100; ++f) {
        samples.push_back({f, f >= 20 && f < 30 ? 3.0 : 0.0, 0.0, 0.0, 0.0});
    }
    const Trajectory traj = Trajectory::from_samples(std::move(samples));

    // P1 jumps 3 m between its two segments: 3/2; P2 has none: 0/1
    const JumpResult result = jump_distance(plan, traj);
    CHECK(result.mean_m == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("jump_distance: contiguous relocation-free segments") {
    ParallelPlan plan;
    plan.n_agents = 1;
    plan.timeline = {100, 1.0};
    plan.assignments = {{{0, 10}, 1, 0}, {{10, 20}, 1, 10}};
    // pose at frame 9 equals pose at frame 10 in a static trajectory
    const JumpResult result = jump_distance(plan, fixtures::static_trajectory(100));
    CHECK(result.mean_m == 0.0);
}

TEST_CASE("object_conflict_rate: transported track halves conflict") {
    const double rate = object_conflict_rate(fixtures::fix_a(), fix_a_annotations().tracks);
    CHECK(rate == doctest::Approx(0.20).epsilon(1e-12));  // plan frames 10..19 of 50
}

TEST_CASE("object_conflict_rate: single agent or disjoint objects never conflict") {
    CHECK(object_conflict_rate(fixtures::fix_b(), fix_a_annotations().tracks) == 0.0);

    ObjectTrackSet disjoint;
    disjoint.tracks["a"] = {{10, 20}};
    disjoint.tracks["b"] = {{60, 70}};
    CHECK(object_conflict_rate(fixtures::fix_a(), disjoint) == 0.0);
}

TEST_CASE("causality_violation_rate: transported reversal") {
    const CvrResult result =
        causality_violation_rate(fixtures::fix_a(), fix_a_annotations().causal_pairs);
    CHECK(result.rate == 1.0);
    CHECK(result.breakdown.prep_reverse == 1);
    CHECK(result.breakdown.total() == 1);
}

TEST_CASE("causality_violation_rate: identity order is clean") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Timeline timeline{100, 1.0};
        const auto pairs = generators::random_causal_pairs(rng, timeline);
        ParallelPlan identity;
        identity.timeline = timeline;
        identity.assignments = {{{0, 100}, 1, 0}};
        const CvrResult result = causality_violation_rate(identity, pairs);
        CHECK(result.rate == 0.0);
    }
}

TEST_CASE("causality_violation_rate: missing cause and absent effect") {
    ParallelPlan partial;
    partial.n_agents = 1;
    partial.timeline = {100, 1.0};
    partial.assignments = {{{50, 100}, 1, 0}};
    const std::vector<CausalPair> pairs = {{{10, 20}, {60, 70}, CausalKind::StepStep}};
    const CvrResult miss = causality_violation_rate(partial, pairs);
    CHECK(miss.rate == 1.0);
    CHECK(miss.breakdown.step_miss == 1);

    ParallelPlan cause_only;
    cause_only.n_agents = 1;
    cause_only.timeline = {100, 1.0};
    cause_only.assignments = {{{0, 50}, 1, 0}};
    const CvrResult satisfied = causality_violation_rate(cause_only, pairs);
    CHECK(satisfied.rate == 0.0);
    CHECK(satisfied.breakdown.total() == 0);
}

TEST_CASE("causality_violation_rate: empty pair list flagged") {
    const CvrResult result = causality_violation_rate(fixtures::fix_a(), {});
    CHECK(result.rate == 0.0);
    CHECK(result.pairs_empty);
}

TEST_CASE("evaluate_all on the identity plan is clean") {
    std::mt19937 rng(37);
    const Timeline timeline{100, 1.0};
    AnnotationSet annotations = generators::random_annotations(rng, timeline);
    const Trajectory traj = generators::random_trajectory(rng, 100, 0.0);

    const MetricReport report = evaluate_all(fixtures::fix_b(), annotations, traj);
    CHECK(report.frame_coverage == 1.0);
    CHECK(report.speed_up == 1.0);
    CHECK(report.collision_rate == 0.0);
    CHECK(report.ocr == 0.0);
    CHECK(report.cvr == 0.0);
    CHECK(report.jump_m == 0.0);
    CHECK(report.per_agent.size() == 1);
    CHECK(report.per_agent[0].busy_frames == 100);
}

TEST_CASE("evaluate_all matches its component metrics on the FIX-A fixture") {
    const ParallelPlan plan = fixtures::fix_a();
    const AnnotationSet annotations = fix_a_annotations();
    const Trajectory traj = fixtures::two_spot_trajectory();

    const MetricReport report = evaluate_all(plan, annotations, traj);
    CHECK(report.frame_coverage == frame_coverage(plan));
    CHECK(report.action_coverage == action_coverage(plan, annotations.actions));
    CHECK(report.speed_up == speed_up(plan));
    CHECK(report.collision_rate == collision_rate(plan, traj).rate);
    CHECK(report.jump_m == jump_distance(plan, traj).mean_m);
    CHECK(report.ocr == object_conflict_rate(plan, annotations.tracks));
    CHECK(report.cvr == causality_violation_rate(plan, annotations.causal_pairs).rate);
    CHECK(report.n_agents == 2);
    CHECK(report.per_agent[0].busy_frames == 50);
    CHECK(report.per_agent[1].busy_frames == 50);
}

TEST_CASE("evaluate_all rejects invalid plans with the violation report") {
    ParallelPlan bad = fixtures::fix_a();
    bad.assignments[1].segment = {30, 100};
    CHECK_THROWS_WITH_AS(
        evaluate_all(bad, fix_a_annotations(), fixtures::static_trajectory(100)),
        doctest::Contains("source-overlap"), std::invalid_argument);
}

TEST_CASE("metrics equal the per-frame oracle on random plans") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const ParallelPlan plan = generators::random_valid_plan(rng, 20, 200);
        if (plan.assignments.empty()) continue;
        const AnnotationSet annotations =
            generators::random_annotations(rng, plan.timeline);
        const Trajectory traj = generators::random_trajectory(rng, plan.timeline.length_frames);

        const MetricReport report = evaluate_all(plan, annotations, traj);
        CHECK(report.frame_coverage == oracles::frame_coverage(plan));
        CHECK(report.action_coverage ==
              oracles::action_coverage(plan, annotations.actions,
                                       CoverageVariant::AgentFraction));
        CHECK(report.speed_up == oracles::speed_up(plan));
        const auto collision = oracles::collision(plan, traj);
        CHECK(report.collision_rate == collision.rate());
        CHECK(report.flags.collision_frames_missing_pose == collision.missing);
        CHECK(report.jump_m == doctest::Approx(oracles::jump(plan, traj)).epsilon(1e-9));
        CHECK(report.ocr == oracles::ocr(plan, annotations.tracks));
        const auto cvr = oracles::cvr(plan, annotations.causal_pairs);
        CHECK(report.cvr == cvr.rate(annotations.causal_pairs.size()));
        CHECK(report.cvr_breakdown == cvr.breakdown);
    }
}

TEST_CASE("speed_up never exceeds the agent count") {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 60; ++trial) {
        const ParallelPlan plan = generators::random_valid_plan(rng);
        if (plan.assignments.empty()) continue;
        CHECK(speed_up(plan) <= static_cast<double>(plan.n_agents));
        CHECK(speed_up(plan) >= 0.0);
    }
}

TEST_CASE("adding an assignment never decreases frame coverage") {
    std::mt19937 rng(47);
    for (int trial = 0; trial < 40; ++trial) {
        ParallelPlan plan = generators::random_valid_plan(rng);
        const double before = frame_coverage(plan);

        // place a fresh segment from an unassigned gap at the plan's end
        const auto mask = assigned_mask(plan);
        FrameIndex gap = -1;
        for (FrameIndex t = 0; t < plan.timeline.length_frames; ++t) {
            if (!mask[static_cast<std::size_t>(t)]) {
                gap = t;
                break;
            }
        }
        if (gap < 0) continue;
        FrameIndex end = gap;
        while (end < plan.timeline.length_frames && !mask[static_cast<std::size_t>(end)]) {
            ++end;
        }
        FrameIndex makespan = 0;
        for (const Assignment& a : plan.assignments) {
            makespan = std::max(makespan, a.plan_end());
        }
        plan.assignments.push_back({{gap, end}, 1, makespan});
        REQUIRE(validate_plan(plan).ok());
        CHECK(frame_coverage(plan) >= before);
    }
}

TEST_CASE("cvr breakdown totals match the violation numerator") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        const ParallelPlan plan = generators::random_valid_plan(rng);
        const auto pairs = generators::random_causal_pairs(rng, plan.timeline);
        const CvrResult result = causality_violation_rate(plan, pairs);
        if (pairs.empty()) {
            CHECK(result.pairs_empty);
            continue;
        }
        CHECK(result.rate * static_cast<double>(pairs.size()) ==
              doctest::Approx(static_cast<double>(result.breakdown.total())));
    }
}

TEST_CASE("aggregate averages per metric") {
    MetricReport a;
    a.speed_up = 1.0;
    a.frame_coverage = 0.5;
    a.cvr = 0.2;
    MetricReport b;
    b.speed_up = 2.0;
    b.frame_coverage = 1.0;
    b.cvr = 0.4;

    const MetricSummary both = aggregate({a, b});
    CHECK(both.speed_up == 1.5);
    CHECK(both.frame_coverage == 0.75);
    CHECK(both.cvr == doctest::Approx(0.3));
    CHECK(both.n_reports == 2);

    const MetricSummary single = aggregate({a});
    CHECK(single.speed_up == 1.0);
    CHECK(single.cvr == doctest::Approx(0.2));
}

TEST_CASE("aggregate skips warned-empty CVR reports in the CVR mean") {
    MetricReport with_pairs;
    with_pairs.cvr = 0.4;
    MetricReport empty_pairs;
    empty_pairs.cvr = 0.0;
    empty_pairs.flags.pairs_empty = true;

    const MetricSummary summary = aggregate({with_pairs, empty_pairs});
    CHECK(summary.n_cvr_reports == 1);
    CHECK(summary.cvr == doctest::Approx(0.4));

    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("report JSON round-trips") {
    std::mt19937 rng(59);
    const ParallelPlan plan = generators::random_valid_plan(rng, 50, 150);
    const AnnotationSet annotations = generators::random_annotations(rng, plan.timeline);
    const Trajectory traj = generators::random_trajectory(rng, plan.timeline.length_frames);
    if (plan.assignments.empty()) return;

    EvaluateOptions options;
    options.video_id = "video-7";
    const MetricReport report = evaluate_all(plan, annotations, traj, options);
    std::istringstream in(report_to_json(report));
    const MetricReport back = report_from_json(in);
    CHECK(back.video_id == report.video_id);
    CHECK(back.frame_coverage == report.frame_coverage);
    CHECK(back.speed_up == report.speed_up);
    CHECK(back.collision_rate == report.collision_rate);
    CHECK(back.cvr_breakdown == report.cvr_breakdown);
    CHECK(back.per_agent.size() == report.per_agent.size());
    CHECK(back.flags.pairs_empty == report.flags.pairs_empty);
}

TEST_CASE("render_table scales percent columns") {
    MetricReport report;
    report.frame_coverage = 1.0;
    report.action_coverage = 1.0;
    report.speed_up = 2.0;
    report.collision_rate = 0.259;
    report.jump_m = 0.0;
    report.ocr = 0.0361;
    report.cvr = 0.147;
    const std::string table = render_table(report);
    CHECK(table.find("100.00") != std::string::npos);
    CHECK(table.find("2.00") != std::string::npos);
    CHECK(table.find("25.90") != std::string::npos);
    CHECK(table.find("3.61") != std::string::npos);
    CHECK(table.find("14.70") != std::string::npos);
    CHECK(table.find("Coverage (%)") != std::string::npos);
}
