#pragma once

#include <optional>
#include <vector>

#include "covy/world.hpp"

namespace covy::testing {

/// 4x4 room with asymmetric furniture; matches configs/asymroom.json.
inline WorldMap asym_room() {
    WorldMap map;
    map.bounds = {0.0, 0.0, 4.0, 4.0};
    map.resolution = 0.05;
    map.obstacles = {
        {{2.6, 2.6}, {3.6, 2.6}, {3.6, 2.9}, {2.9, 2.9}, {2.9, 3.6}, {2.6, 3.6}},
        {{0.7, 0.9}, {1.2, 0.9}, {1.2, 1.3}, {0.7, 1.3}},
        {{2.2, 0.0}, {2.35, 0.0}, {2.35, 0.9}, {2.2, 0.9}},
        {{0.0, 2.2}, {0.5, 2.5}, {0.0, 2.8}},
    };
    return map;
}

inline WorldMap empty_room() {
    WorldMap map;
    map.bounds = {0.0, 0.0, 4.0, 4.0};
    map.resolution = 0.05;
    return map;
}

/// Independent brute-force ray hit for the lidar oracle: every wall,
/// polygon edge and pedestrian disk tested with a Cramer 2x2 solve.
inline double brute_force_ray(const WorldMap& map, const std::vector<PedestrianAgent>& peds,
                              const Vec2& origin, double angle, double max_range) {
    const double dx = std::cos(angle), dy = std::sin(angle);
    double best = max_range;

    std::vector<std::pair<Vec2, Vec2>> segments;
    const Bounds& b = map.bounds;
    segments.push_back({{b.min_x, b.min_y}, {b.max_x, b.min_y}});
    segments.push_back({{b.max_x, b.min_y}, {b.max_x, b.max_y}});
    segments.push_back({{b.max_x, b.max_y}, {b.min_x, b.max_y}});
    segments.push_back({{b.min_x, b.max_y}, {b.min_x, b.min_y}});
    for (const Polygon& poly : map.obstacles) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            segments.push_back({poly[i], poly[(i + 1) % poly.size()]});
        }
    }
    for (const auto& [a, c] : segments) {
        // origin + t*d == a + u*(c-a); solve the 2x2 system by determinants.
        const double ex = c.x - a.x, ey = c.y - a.y;
        const double det = dx * (-ey) - dy * (-ex);
        if (std::fabs(det) < 1e-15) continue;
        const double rx = a.x - origin.x, ry = a.y - origin.y;
        const double t = (rx * (-ey) + ry * ex) / det;
        const double u = (dx * ry - dy * rx) / det;
        if (t >= 0.0 && u >= 0.0 && u <= 1.0 && t < best) best = t;
    }
    for (const PedestrianAgent& ped : peds) {
        const double cx = ped.position.x - origin.x, cy = ped.position.y - origin.y;
        const double proj = cx * dx + cy * dy;
        const double d2 = cx * cx + cy * cy - proj * proj;
        const double r2 = ped.radius * ped.radius;
        if (d2 > r2) continue;
        const double off = std::sqrt(r2 - d2);
        const double t = (proj - off) >= 0.0 ? (proj - off) : (proj + off);
        if (t >= 0.0 && t < best) best = t;
    }
    return best;
}

}  // namespace covy::testing
