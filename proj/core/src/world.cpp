#include "covy/world.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace covy {

namespace {

constexpr double kStraightLimit = 1e-9;

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return (q - p).cross(r - p);
    };
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

/// Ray-segment intersection; returns hit parameter t >= 0 along the ray.
std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir, const Vec2& a,
                                  const Vec2& b) {
    const Vec2 seg = b - a;
    const double denom = dir.cross(seg);
    if (std::fabs(denom) < 1e-15) return std::nullopt;  // parallel
    const Vec2 ao = a - origin;
    const double t = ao.cross(seg) / denom;
    const double u = ao.cross(dir) / denom;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
    return std::nullopt;
}

/// Ray-disk intersection; nearest positive hit parameter.
std::optional<double> ray_disk(const Vec2& origin, const Vec2& dir, const Vec2& center,
                               double radius) {
    const Vec2 oc = origin - center;
    const double b = oc.dot(dir);
    const double c = oc.squared_norm() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t1 = -b - sq;
    if (t1 >= 0.0) return t1;
    const double t2 = -b + sq;
    if (t2 >= 0.0) return t2;
    return std::nullopt;
}

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& pi = poly[i];
        const Vec2& pj = poly[j];
        if (((pi.y > p.y) != (pj.y > p.y)) &&
            (p.x < (pj.x - pi.x) * (p.y - pi.y) / (pj.y - pi.y) + pi.x)) {
            inside = !inside;
        }
    }
    return inside;
}

}  // namespace

void WorldMap::validate() const {
    if (resolution <= 0.0) throw std::invalid_argument("map.resolution must be > 0");
    if (bounds.width() <= 0.0 || bounds.height() <= 0.0)
        throw std::invalid_argument("map.bounds must have positive extent");
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
        const Polygon& poly = obstacles[k];
        const std::string name = "map.obstacles[" + std::to_string(k) + "]";
        if (poly.size() < 3) throw std::invalid_argument(name + " needs >= 3 vertices");
        for (const Vec2& v : poly) {
            if (!bounds.contains(v)) throw std::invalid_argument(name + " leaves map bounds");
        }
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // Adjacent edges share a vertex; skip them.
                if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
                if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                    throw std::invalid_argument(name + " is self-intersecting");
            }
        }
    }
}

bool WorldMap::inside_obstacle(const Vec2& p) const {
    for (const Polygon& poly : obstacles) {
        if (point_in_polygon(p, poly)) return true;
    }
    return false;
}

double WorldMap::distance_to_nearest_obstacle(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    // Bounds walls count as obstacle surface.
    best = std::min(best, p.x - bounds.min_x);
    best = std::min(best, bounds.max_x - p.x);
    best = std::min(best, p.y - bounds.min_y);
    best = std::min(best, bounds.max_y - p.y);
    for (const Polygon& poly : obstacles) {
        if (point_in_polygon(p, poly)) return 0.0;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
        }
    }
    return best;
}

OccupancyGrid WorldMap::rasterize() const {
    OccupancyGrid grid;
    grid.resolution = resolution;
    grid.origin_x = bounds.min_x;
    grid.origin_y = bounds.min_y;
    grid.width = static_cast<int>(std::ceil(bounds.width() / resolution));
    grid.height = static_cast<int>(std::ceil(bounds.height() / resolution));
    grid.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);

    const double half = 0.5 * resolution;
    for (int iy = 0; iy < grid.height; ++iy) {
        for (int ix = 0; ix < grid.width; ++ix) {
            bool occ = false;
            if (ix == 0 || iy == 0 || ix == grid.width - 1 || iy == grid.height - 1) {
                occ = true;  // bounds wall ring
            } else {
                const Vec2 c = grid.cell_center(ix, iy);
                for (const Polygon& poly : obstacles) {
                    if (point_in_polygon(c, poly)) {
                        occ = true;
                        break;
                    }
                    const std::size_t n = poly.size();
                    for (std::size_t i = 0; i < n && !occ; ++i) {
                        if (point_segment_distance(c, poly[i], poly[(i + 1) % n]) <= half)
                            occ = true;
                    }
                    if (occ) break;
                }
            }
            if (occ) grid.cells[static_cast<std::size_t>(iy) * grid.width + ix] = 1;
        }
    }
    return grid;
}

double LidarScan::min_range() const {
    double m = max_range;
    for (double r : ranges) m = std::min(m, r);
    return m;
}

RobotState step_robot(const RobotState& state, double v_cmd, double w_cmd, double dt) {
    if (!std::isfinite(v_cmd) || !std::isfinite(w_cmd))
        throw std::invalid_argument("step_robot: non-finite velocity command");
    if (!(dt > 0.0)) throw std::invalid_argument("step_robot: dt must be > 0");

    RobotState next = state;
    next.v = std::clamp(v_cmd, 0.0, state.v_max);
    next.w = std::clamp(w_cmd, -state.w_max, state.w_max);

    const double th = state.pose.theta;
    if (std::fabs(next.w) < kStraightLimit) {
        next.pose.x = state.pose.x + next.v * dt * std::cos(th);
        next.pose.y = state.pose.y + next.v * dt * std::sin(th);
        next.pose.theta = wrap_angle(th);
    } else {
        const double r = next.v / next.w;
        const double th1 = th + next.w * dt;
        next.pose.x = state.pose.x + r * (std::sin(th1) - std::sin(th));
        next.pose.y = state.pose.y - r * (std::cos(th1) - std::cos(th));
        next.pose.theta = wrap_angle(th1);
    }
    return next;
}

double cast_ray(const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians,
                const Vec2& origin, double angle, double max_range) {
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    double best = max_range;

    const auto consider = [&](std::optional<double> t) {
        if (t && *t < best) best = *t;
    };

    // Bounds walls.
    const Bounds& b = map.bounds;
    const Vec2 c00{b.min_x, b.min_y}, c10{b.max_x, b.min_y};
    const Vec2 c11{b.max_x, b.max_y}, c01{b.min_x, b.max_y};
    consider(ray_segment(origin, dir, c00, c10));
    consider(ray_segment(origin, dir, c10, c11));
    consider(ray_segment(origin, dir, c11, c01));
    consider(ray_segment(origin, dir, c01, c00));

    for (const Polygon& poly : map.obstacles) {
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            consider(ray_segment(origin, dir, poly[i], poly[(i + 1) % n]));
        }
    }
    for (const PedestrianAgent& ped : pedestrians) {
        consider(ray_disk(origin, dir, ped.position, ped.radius));
    }
    return best;
}

LidarScan cast_lidar(const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians,
                     const Pose2D& pose, const LidarConfig& config, Rng& rng,
                     std::int64_t timestamp) {
    if (config.beam_count < 1) throw std::invalid_argument("cast_lidar: beam_count must be >= 1");
    if (!(config.max_range > 0.0)) throw std::invalid_argument("cast_lidar: max_range must be > 0");
    if (config.noise_sigma < 0.0) throw std::invalid_argument("cast_lidar: noise_sigma must be >= 0");
    if (!map.bounds.contains(pose.position()))
        throw std::invalid_argument("cast_lidar: pose outside map bounds");

    LidarScan scan;
    scan.angle_min = config.angle_min;
    scan.angle_max = config.angle_max;
    scan.beam_count = config.beam_count;
    scan.max_range = config.max_range;
    scan.timestamp = timestamp;
    scan.ranges.resize(config.beam_count);

    const Vec2 origin = pose.position();
    for (int i = 0; i < config.beam_count; ++i) {
        const double angle = pose.theta + scan.beam_angle(i);
        double r = cast_ray(map, pedestrians, origin, angle, config.max_range);
        if (r < config.max_range && config.noise_sigma > 0.0) {
            r = std::clamp(r + rng.normal(0.0, config.noise_sigma), 1e-6, config.max_range);
        }
        scan.ranges[i] = r;
    }
    return scan;
}

std::vector<PedestrianAgent> step_pedestrians(const std::vector<PedestrianAgent>& pedestrians,
                                              double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_pedestrians: dt must be > 0");
    std::vector<PedestrianAgent> out = pedestrians;
    for (PedestrianAgent& ped : out) {
        if (ped.mode != PedestrianAgent::Mode::Waypoint || ped.waypoints.empty()) {
            ped.velocity = {0.0, 0.0};
            continue;
        }
        if (ped.waypoint_index >= ped.waypoints.size()) ped.waypoint_index = 0;
        Vec2 target = ped.waypoints[ped.waypoint_index];
        if (distance(ped.position, target) < 0.05) {
            ped.waypoint_index = (ped.waypoint_index + 1) % ped.waypoints.size();
            target = ped.waypoints[ped.waypoint_index];
        }
        const Vec2 to_target = target - ped.position;
        const double d = to_target.norm();
        if (d < 1e-12) {
            ped.velocity = {0.0, 0.0};
            continue;
        }
        const Vec2 dir = to_target * (1.0 / d);
        const double step = std::min(ped.speed * dt, d);
        ped.position += dir * step;
        ped.velocity = dir * ped.speed;
    }
    return out;
}

bool check_collision(const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians,
                     const Pose2D& pose, double radius) {
    const Vec2 p = pose.position();
    const Bounds& b = map.bounds;
    if (!b.contains(p)) return true;
    if (p.x - b.min_x < radius || b.max_x - p.x < radius || p.y - b.min_y < radius ||
        b.max_y - p.y < radius) {
        return true;
    }
    for (const Polygon& poly : map.obstacles) {
        if (point_in_polygon(p, poly)) return true;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (point_segment_distance(p, poly[i], poly[(i + 1) % n]) < radius) return true;
        }
    }
    for (const PedestrianAgent& ped : pedestrians) {
        if (distance(p, ped.position) < radius + ped.radius) return true;
    }
    return false;
}

}  // namespace covy
