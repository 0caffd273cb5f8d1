#include "parex/geometry.hpp"

#include "fixtures.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace parex;

namespace {

PoseSample pose(double x, double y, double yaw = 0.0) { return {0, x, y, 0.0, yaw}; }

// Triplets must be sorted, non-overlapping and cover exactly the sampled
// frames.
void check_partition(const ZoneOccupancy& zones, const Trajectory& traj) {
    std::set<FrameIndex> covered;
    FrameIndex prev_end = -1;
    int prev_zone = -1;
    for (const ZoneTriplet& t : zones.triplets) {
        CHECK(t.start < t.end);
        CHECK(t.start >= prev_end);
        if (t.start == prev_end) {
            CHECK(t.zone != prev_zone);  // adjacent runs change zone
        }
        for (FrameIndex f = t.start; f < t.end; ++f) {
            CHECK(traj.has(f));
            covered.insert(f);
        }
        prev_end = t.end;
        prev_zone = t.zone;
    }
    CHECK(covered.size() == traj.sample_count());
}

}  // namespace

TEST_CASE("is_collide: coincident centers always collide") {
    CHECK(is_collide(pose(0, 0, 0.0), pose(0, 0, 0.0)));
    CHECK(is_collide(pose(0, 0, 1.1), pose(0, 0, -2.3)));
}

TEST_CASE("is_collide: separation along the width axis") {
    // yaw 0 heads along +x, so the width axis is y
    CHECK_FALSE(is_collide(pose(0, 0), pose(0, 0.50)));
    CHECK(is_collide(pose(0, 0), pose(0, 0.30)));
    // and along the depth axis the threshold is 0.25
    CHECK_FALSE(is_collide(pose(0, 0), pose(0.26, 0)));
    CHECK(is_collide(pose(0, 0), pose(0.24, 0)));
}

TEST_CASE("is_collide is symmetric and rigid-motion invariant") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> coord(-0.6, 0.6);
    std::uniform_real_distribution<double> angle(-3.2, 3.2);
    for (int trial = 0; trial < 300; ++trial) {
        const PoseSample a = pose(coord(rng), coord(rng), angle(rng));
        const PoseSample b = pose(coord(rng), coord(rng), angle(rng));
        const bool hit = is_collide(a, b);
        CHECK(hit == is_collide(b, a));

        const double rot = angle(rng);
        const double tx = coord(rng) * 10.0, ty = coord(rng) * 10.0;
        const auto moved = [&](const PoseSample& p) {
            return pose(p.x * std::cos(rot) - p.y * std::sin(rot) + tx,
                        p.x * std::sin(rot) + p.y * std::cos(rot) + ty, p.yaw + rot);
        };
        CHECK(hit == is_collide(moved(a), moved(b)));
    }
}

TEST_CASE("is_collide: beyond the box diagonal no pair collides") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> angle(-3.2, 3.2);
    std::uniform_real_distribution<double> dist(0.53, 3.0);
    for (int trial = 0; trial < 300; ++trial) {
        const double theta = angle(rng);
        const double d = dist(rng);
        CHECK_FALSE(is_collide(pose(0, 0, angle(rng)),
                               pose(d * std::cos(theta), d * std::sin(theta), angle(rng))));
    }
}

TEST_CASE("agent_pose_at transports the source pose") {
    const ParallelPlan plan = fixtures::fix_a();
    const Trajectory traj = fixtures::two_spot_trajectory();

    const auto at = agent_pose_at(plan, traj, 2, 10);
    REQUIRE(at.has_value());
    CHECK(at->frame == 60);
    CHECK(at->x == 3.0);

    CHECK_FALSE(agent_pose_at(plan, traj, 1, 60).has_value());  // past P1's work
    CHECK_THROWS_AS(agent_pose_at(plan, traj, 3, 0), std::invalid_argument);
}

TEST_CASE("agent_pose_at is empty between segments") {
    ParallelPlan plan;
    plan.n_agents = 1;
    plan.timeline = {100, 1.0};
    plan.assignments = {{{0, 10}, 1, 0}, {{20, 30}, 1, 20}};
    const Trajectory traj = fixtures::static_trajectory(100);
    CHECK(agent_pose_at(plan, traj, 1, 5).has_value());
    CHECK_FALSE(agent_pose_at(plan, traj, 1, 15).has_value());  // idle gap
    CHECK(agent_pose_at(plan, traj, 1, 25).has_value());
}

TEST_CASE("grid_zones splits the two-spot trajectory at the midpoint") {
    const Trajectory traj = fixtures::two_spot_trajectory();
    const ZoneOccupancy zones = grid_zones(traj, 1.2);
    REQUIRE(zones.triplets.size() == 2);
    CHECK(zones.triplets[0] == ZoneTriplet{0, 50, 0});
    CHECK(zones.triplets[1] == ZoneTriplet{50, 100, 1});
    const auto& grid = std::get<GridGeometry>(zones.geometry);
    CHECK(grid.anchor_x == 0.0);
    CHECK(grid.cell_size == 1.2);
}

TEST_CASE("grid_zones maps a static trajectory to one triplet") {
    const Trajectory traj = fixtures::static_trajectory(80, 2.0, -1.0);
    const ZoneOccupancy zones = grid_zones(traj, 1.2);
    REQUIRE(zones.triplets.size() == 1);
    CHECK(zones.triplets[0] == ZoneTriplet{0, 80, 0});
}

TEST_CASE("grid_zones rejects bad input") {
    CHECK_THROWS_AS(grid_zones(Trajectory{}, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(grid_zones(fixtures::static_trajectory(5), 0.0), std::invalid_argument);
}

TEST_CASE("finer grids never merge runs: refinement property") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const Trajectory traj = generators::random_trajectory(rng, 120);
        if (traj.empty()) continue;
        const ZoneOccupancy fine = grid_zones(traj, 0.4);
        const ZoneOccupancy coarse = grid_zones(traj, 1.2);
        CHECK(fine.triplets.size() >= coarse.triplets.size());
        check_partition(fine, traj);
        check_partition(coarse, traj);
    }
}

TEST_CASE("gmm_zones separates two tight clusters like nearest-mean") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    std::vector<PoseSample> samples;
    for (FrameIndex f = 0; f < 100; ++f) {
        const double cx = f < 50 ? 0.0 : 3.0;
        samples.push_back({f, cx + jitter(rng), jitter(rng), 0.0, 0.0});
    }
    const Trajectory traj = Trajectory::from_samples(std::move(samples));
    const ZoneOccupancy zones = gmm_zones(traj, 2, 17);
    REQUIRE(zones.triplets.size() == 2);
    CHECK(zones.triplets[0] == ZoneTriplet{0, 50, 0});
    CHECK(zones.triplets[1] == ZoneTriplet{50, 100, 1});
    check_partition(zones, traj);
}

TEST_CASE("gmm_zones with one component covers everything") {
    std::mt19937 rng(14);
    const Trajectory traj = generators::random_trajectory(rng, 60, 0.0);
    const ZoneOccupancy zones = gmm_zones(traj, 1, 3);
    REQUIRE(zones.triplets.size() == 1);
    CHECK(zones.triplets[0] == ZoneTriplet{0, 60, 0});
}

TEST_CASE("gmm_zones is deterministic for a fixed seed") {
    std::mt19937 rng(15);
    const Trajectory traj = generators::random_trajectory(rng, 150, 0.0);
    const ZoneOccupancy a = gmm_zones(traj, 4, 42);
    const ZoneOccupancy b = gmm_zones(traj, 4, 42);
    CHECK(a.triplets == b.triplets);
}

TEST_CASE("gmm_zones rejects degenerate input") {
    const Trajectory traj = fixtures::static_trajectory(10);  // one distinct point
    CHECK_THROWS_AS(gmm_zones(traj, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(gmm_zones(Trajectory{}, 1, 0), std::invalid_argument);
}

TEST_CASE("walking_distance on a static trajectory is zero") {
    const Trajectory traj = fixtures::static_trajectory(50);
    std::vector<FrameIndex> frames;
    for (FrameIndex f = 0; f < 50; ++f) frames.push_back(f);
    CHECK(walking_distance(traj, frames) == 0.0);
}

TEST_CASE("walking_distance sums a straight-line run") {
    std::vector<PoseSample> samples;
    for (FrameIndex f = 0; f < 20; ++f) {
        samples.push_back({f, 0.1 * static_cast<double>(f), 0.0, 0.0, 0.0});
    }
    const Trajectory traj = Trajectory::from_samples(std::move(samples));
    std::vector<FrameIndex> frames;
    for (FrameIndex f = 0; f <= 10; ++f) frames.push_back(f);
    CHECK(walking_distance(traj, frames) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("walking_distance skips gaps between runs") {
    std::vector<PoseSample> samples;
    for (FrameIndex f = 0; f < 40; ++f) {
        samples.push_back({f, 0.1 * static_cast<double>(f), 0.0, 0.0, 0.0});
    }
    const Trajectory traj = Trajectory::from_samples(std::move(samples));

    // two runs: [0..5] and [20..25]; the 1.5 m between them is not walked
    std::vector<FrameIndex> frames;
    for (FrameIndex f = 0; f <= 5; ++f) frames.push_back(f);
    for (FrameIndex f = 20; f <= 25; ++f) frames.push_back(f);

    double expected = 0.0;
    for (FrameIndex f = 0; f < 5; ++f) expected += 0.1;
    for (FrameIndex f = 20; f < 25; ++f) expected += 0.1;
    CHECK(walking_distance(traj, frames) == doctest::Approx(expected).epsilon(1e-12));
}
