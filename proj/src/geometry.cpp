#include "parex/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace parex {

namespace {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

struct Obb {
    Vec2 center;
    Vec2 heading;      // unit vector along yaw (depth axis)
    Vec2 lateral;      // unit vector across yaw (width axis)
    double half_depth;
    double half_width;
};

Obb body_obb(const PoseSample& pose, const BodyBox& box) {
    Obb obb;
    obb.center = {pose.x, pose.y};
    obb.heading = {std::cos(pose.yaw), std::sin(pose.yaw)};
    obb.lateral = {-obb.heading.y, obb.heading.x};
    obb.half_depth = box.depth * 0.5;
    obb.half_width = box.width * 0.5;
    return obb;
}

// Projected radius of a box onto a unit axis.
double radius_on(const Obb& b, const Vec2& axis) {
    return b.half_depth * std::abs(dot(b.heading, axis)) +
           b.half_width * std::abs(dot(b.lateral, axis));
}

bool separated_on(const Obb& a, const Obb& b, const Vec2& axis) {
    const Vec2 delta{b.center.x - a.center.x, b.center.y - a.center.y};
    return std::abs(dot(delta, axis)) > radius_on(a, axis) + radius_on(b, axis);
}

}  // namespace

bool is_collide(const PoseSample& a, const PoseSample& b, const BodyBox& box) {
    const Obb oa = body_obb(a, box);
    const Obb ob = body_obb(b, box);
    return !separated_on(oa, ob, oa.heading) && !separated_on(oa, ob, oa.lateral) &&
           !separated_on(oa, ob, ob.heading) && !separated_on(oa, ob, ob.lateral);
}

std::optional<PoseSample> agent_pose_at(const ParallelPlan& plan, const Trajectory& traj,
                                        int agent, FrameIndex plan_frame) {
    if (agent < 1 || agent > plan.n_agents) {
        throw std::invalid_argument("agent_pose_at: unknown agent " + std::to_string(agent));
    }
    for (const Assignment& a : plan.assignments) {
        if (a.agent != agent) continue;
        if (plan_frame >= a.plan_start && plan_frame < a.plan_end()) {
            return traj.at(a.segment.start + (plan_frame - a.plan_start));
        }
    }
    return std::nullopt;
}

namespace {

// Merges per-frame zone labels into runs. A gap in the sampled frames ends
// the current run.
std::vector<ZoneTriplet> merge_runs(const std::vector<std::pair<FrameIndex, int>>& labeled) {
    std::vector<ZoneTriplet> triplets;
    for (const auto& [frame, zone] : labeled) {
        if (!triplets.empty() && triplets.back().zone == zone &&
            triplets.back().end == frame) {
            ++triplets.back().end;
        } else {
            triplets.push_back({frame, frame + 1, zone});
        }
    }
    return triplets;
}

}  // namespace

ZoneOccupancy grid_zones(const Trajectory& traj, double cell_size) {
    if (!(cell_size > 0.0)) {
        throw std::invalid_argument("grid_zones: cell_size must be positive");
    }
    if (traj.empty()) {
        throw std::invalid_argument("grid_zones: empty trajectory");
    }

    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    for (const PoseSample& s : traj.samples()) {
        min_x = std::min(min_x, s.x);
        min_y = std::min(min_y, s.y);
    }

    std::map<std::pair<std::int64_t, std::int64_t>, int> cell_ids;
    std::vector<std::pair<FrameIndex, int>> labeled;
    labeled.reserve(traj.sample_count());
    for (const PoseSample& s : traj.samples()) {
        const std::pair<std::int64_t, std::int64_t> cell{
            static_cast<std::int64_t>(std::floor((s.x - min_x) / cell_size)),
            static_cast<std::int64_t>(std::floor((s.y - min_y) / cell_size))};
        const auto it = cell_ids.emplace(cell, static_cast<int>(cell_ids.size())).first;
        labeled.emplace_back(s.frame, it->second);
    }

    ZoneOccupancy zones;
    zones.triplets = merge_runs(labeled);
    zones.geometry = GridGeometry{min_x, min_y, cell_size};
    return zones;
}

namespace {

constexpr double kCovarianceFloor = 1e-6;  // m^2

struct Gaussian {
    double weight;
    Vec2 mean;
    double cov_xx, cov_xy, cov_yy;
    // cached for density evaluation
    double inv_xx, inv_xy, inv_yy, log_norm;
};

void cache_density_terms(Gaussian& g) {
    const double det = g.cov_xx * g.cov_yy - g.cov_xy * g.cov_xy;
    g.inv_xx = g.cov_yy / det;
    g.inv_yy = g.cov_xx / det;
    g.inv_xy = -g.cov_xy / det;
    g.log_norm = -std::log(2.0 * M_PI) - 0.5 * std::log(det);
}

double log_density(const Gaussian& g, const Vec2& p) {
    const double dx = p.x - g.mean.x;
    const double dy = p.y - g.mean.y;
    const double quad = dx * dx * g.inv_xx + 2.0 * dx * dy * g.inv_xy + dy * dy * g.inv_yy;
    return g.log_norm - 0.5 * quad;
}

// k-means++ style seeding: first center uniform, the rest proportional to
// squared distance from the nearest chosen center.
std::vector<Vec2> seed_means(const std::vector<Vec2>& points, int k, std::mt19937& rng) {
    std::vector<Vec2> means;
    std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
    means.push_back(points[first(rng)]);
    std::vector<double> dist2(points.size());
    while (static_cast<int>(means.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec2& m : means) {
                const double dx = points[i].x - m.x;
                const double dy = points[i].y - m.y;
                best = std::min(best, dx * dx + dy * dy);
            }
            dist2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all remaining points coincide with a chosen center; callers
            // guarantee >= k distinct points, so pick the next unused one
            for (const Vec2& p : points) {
                bool used = false;
                for (const Vec2& m : means) {
                    used = used || (m.x == p.x && m.y == p.y);
                }
                if (!used) {
                    means.push_back(p);
                    break;
                }
            }
            continue;
        }
        std::uniform_real_distribution<double> pick(0.0, total);
        double target = pick(rng);
        std::size_t chosen = points.size() - 1;
        for (std::size_t i = 0; i < points.size(); ++i) {
            target -= dist2[i];
            if (target <= 0.0) {
                chosen = i;
                break;
            }
        }
        means.push_back(points[chosen]);
    }
    return means;
}

}  // namespace

ZoneOccupancy gmm_zones(const Trajectory& traj, int k, unsigned seed, int max_iters) {
    if (k < 1) throw std::invalid_argument("gmm_zones: k must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("gmm_zones: max_iters must be >= 1");
    if (traj.empty()) throw std::invalid_argument("gmm_zones: empty trajectory");

    std::vector<Vec2> points;
    points.reserve(traj.sample_count());
    for (const PoseSample& s : traj.samples()) points.push_back({s.x, s.y});

    std::vector<Vec2> distinct = points;
    std::sort(distinct.begin(), distinct.end(), [](const Vec2& a, const Vec2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [](const Vec2& a, const Vec2& b) {
                                   return a.x == b.x && a.y == b.y;
                               }),
                   distinct.end());
    if (static_cast<int>(distinct.size()) < k) {
        throw std::invalid_argument("gmm_zones: fewer than k distinct points");
    }

    std::mt19937 rng(seed);
    std::vector<Vec2> means = seed_means(distinct, k, rng);

    // Initial spherical covariance from the overall spread.
    double mean_x = 0.0, mean_y = 0.0;
    for (const Vec2& p : points) {
        mean_x += p.x;
        mean_y += p.y;
    }
    mean_x /= static_cast<double>(points.size());
    mean_y /= static_cast<double>(points.size());
    double var = 0.0;
    for (const Vec2& p : points) {
        var += (p.x - mean_x) * (p.x - mean_x) + (p.y - mean_y) * (p.y - mean_y);
    }
    var = std::max(var / (2.0 * static_cast<double>(points.size())), kCovarianceFloor);

    std::vector<Gaussian> components(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        Gaussian& g = components[static_cast<std::size_t>(j)];
        g.weight = 1.0 / static_cast<double>(k);
        g.mean = means[static_cast<std::size_t>(j)];
        g.cov_xx = g.cov_yy = var;
        g.cov_xy = 0.0;
        cache_density_terms(g);
    }

    const std::size_t n = points.size();
    std::vector<double> resp(n * static_cast<std::size_t>(k));
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        // E step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double max_log = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const Gaussian& g = components[static_cast<std::size_t>(j)];
                const double lp = std::log(g.weight) + log_density(g, points[i]);
                resp[i * k + static_cast<std::size_t>(j)] = lp;
                max_log = std::max(max_log, lp);
            }
            double denom = 0.0;
            for (int j = 0; j < k; ++j) {
                denom += std::exp(resp[i * k + static_cast<std::size_t>(j)] - max_log);
            }
            for (int j = 0; j < k; ++j) {
                resp[i * k + static_cast<std::size_t>(j)] =
                    std::exp(resp[i * k + static_cast<std::size_t>(j)] - max_log) / denom;
            }
            ll += max_log + std::log(denom);
        }

        // M step, with the covariance floor applied on the diagonal
        for (int j = 0; j < k; ++j) {
            Gaussian& g = components[static_cast<std::size_t>(j)];
            double nj = 0.0, sx = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * k + static_cast<std::size_t>(j)];
                nj += r;
                sx += r * points[i].x;
                sy += r * points[i].y;
            }
            if (nj < 1e-12) {
                // starved component: keep its parameters
                continue;
            }
            g.weight = nj / static_cast<double>(n);
            g.mean = {sx / nj, sy / nj};
            double cxx = 0.0, cxy = 0.0, cyy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * k + static_cast<std::size_t>(j)];
                const double dx = points[i].x - g.mean.x;
                const double dy = points[i].y - g.mean.y;
                cxx += r * dx * dx;
                cxy += r * dx * dy;
                cyy += r * dy * dy;
            }
            g.cov_xx = cxx / nj + kCovarianceFloor;
            g.cov_xy = cxy / nj;
            g.cov_yy = cyy / nj + kCovarianceFloor;
            cache_density_terms(g);
        }

        if (std::abs(ll - prev_ll) < 1e-9 * (1.0 + std::abs(ll))) break;
        prev_ll = ll;
    }

    // Hard assignment by argmax responsibility, relabelled in first-appearance
    // order so zone ids are stable.
    std::vector<std::pair<FrameIndex, int>> labeled;
    labeled.reserve(n);
    std::vector<int> relabel(static_cast<std::size_t>(k), -1);
    int next_id = 0;
    const auto& samples = traj.samples();
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_lp = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const Gaussian& g = components[static_cast<std::size_t>(j)];
            const double lp = std::log(g.weight) + log_density(g, points[i]);
            if (lp > best_lp) {
                best_lp = lp;
                best = j;
            }
        }
        if (relabel[static_cast<std::size_t>(best)] < 0) {
            relabel[static_cast<std::size_t>(best)] = next_id++;
        }
        labeled.emplace_back(samples[i].frame, relabel[static_cast<std::size_t>(best)]);
    }

    ZoneOccupancy zones;
    zones.triplets = merge_runs(labeled);
    MixtureGeometry geometry;
    geometry.seed = seed;
    geometry.max_iters = max_iters;
    for (const Gaussian& g : components) {
        geometry.components.push_back(
            {g.weight, g.mean.x, g.mean.y, g.cov_xx, g.cov_xy, g.cov_yy});
    }
    zones.geometry = std::move(geometry);
    return zones;
}

double walking_distance(const Trajectory& traj, std::vector<FrameIndex> frames) {
    std::sort(frames.begin(), frames.end());
    frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
        if (frames[i + 1] != frames[i] + 1) continue;  // run boundary
        const auto a = traj.at(frames[i]);
        const auto b = traj.at(frames[i + 1]);
        if (!a || !b) continue;
        total += std::hypot(b->x - a->x, b->y - a->y);
    }
    return total;
}

}  // namespace parex
