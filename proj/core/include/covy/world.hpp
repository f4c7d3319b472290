#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covy/geometry.hpp"
#include "covy/rng.hpp"

namespace covy {

/// Differential-drive robot: pose, commanded velocities, body disk.
struct RobotState {
    Pose2D pose;
    double v{0.0};       // m/s, in [0, v_max]
    double w{0.0};       // rad/s, in [-w_max, w_max]
    double radius{0.11};
    double v_max{0.2};
    double w_max{2.0};
};

using Polygon = std::vector<Vec2>;

struct Bounds {
    double min_x{0.0}, min_y{0.0}, max_x{4.0}, max_y{4.0};

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    bool contains(const Vec2& p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

/// Boolean occupancy raster of a WorldMap. Outermost cell ring is always
/// occupied (the bounds rectangle is a wall).
struct OccupancyGrid {
    int width{0};
    int height{0};
    double resolution{0.05};
    double origin_x{0.0};
    double origin_y{0.0};
    std::vector<std::uint8_t> cells;  // row-major, 1 = occupied

    bool occupied(int ix, int iy) const {
        if (ix < 0 || iy < 0 || ix >= width || iy >= height) return true;
        return cells[static_cast<std::size_t>(iy) * width + ix] != 0;
    }
    Vec2 cell_center(int ix, int iy) const {
        return {origin_x + (ix + 0.5) * resolution, origin_y + (iy + 0.5) * resolution};
    }
};

/// Axis-aligned bounded world with simple polygonal obstacles.
struct WorldMap {
    Bounds bounds;
    std::vector<Polygon> obstacles;
    double resolution{0.05};

    /// Throws std::invalid_argument naming the offending obstacle if a polygon
    /// is degenerate, self-intersecting or leaves the bounds.
    void validate() const;

    bool inside_obstacle(const Vec2& p) const;
    double distance_to_nearest_obstacle(const Vec2& p) const;

    /// Deterministic rasterization at `resolution` meters per cell.
    OccupancyGrid rasterize() const;
};

struct PedestrianAgent {
    enum class Mode { Static, Waypoint };

    int id{0};
    Vec2 position;
    Vec2 velocity;           // zero for static agents
    std::vector<Vec2> waypoints;
    std::size_t waypoint_index{0};
    double speed{0.0};       // m/s along the waypoint path
    double radius{0.25};
    Mode mode{Mode::Static};
};

struct LidarScan {
    std::vector<double> ranges;
    double angle_min{-kPi / 2};
    double angle_max{kPi / 2};
    int beam_count{0};
    double max_range{6.0};
    std::int64_t timestamp{0};

    /// Angle of beam i in the robot frame. Beams are evenly spaced and
    /// inclusive of both endpoints when beam_count > 1.
    double beam_angle(int i) const {
        if (beam_count <= 1) return angle_min;
        return angle_min + i * (angle_max - angle_min) / (beam_count - 1);
    }
    double min_range() const;
};

struct LidarConfig {
    int beam_count{10};
    double angle_min{-kPi / 2};
    double angle_max{kPi / 2};
    double max_range{6.0};
    double noise_sigma{0.0};
};

/// Clamps commands to the state's velocity box and integrates the unicycle
/// along an exact circular arc (straight-line limit when |w| < 1e-9).
RobotState step_robot(const RobotState& state, double v_cmd, double w_cmd, double dt);

/// Raycast lidar against obstacle polygons, pedestrian disks and the bounds
/// walls. Gaussian range noise is clamped into (0, max_range]; beams that hit
/// nothing report exactly max_range.
LidarScan cast_lidar(const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians,
                     const Pose2D& pose, const LidarConfig& config, Rng& rng,
                     std::int64_t timestamp = 0);

/// Advances waypoint followers at constant speed; a follower within 0.05 m of
/// its waypoint switches to the next one (lists cycle). Static agents are
/// returned unchanged.
std::vector<PedestrianAgent> step_pedestrians(const std::vector<PedestrianAgent>& pedestrians,
                                              double dt);

/// True iff the robot disk strictly intersects an obstacle polygon, a
/// pedestrian disk, or the bounds walls.
bool check_collision(const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians,
                     const Pose2D& pose, double radius);

/// Nearest hit along a single ray; max_range when nothing is hit.
double cast_ray(const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians,
                const Vec2& origin, double angle, double max_range);

}  // namespace covy
