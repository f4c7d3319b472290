#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace covy {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
    double x{0.0};
    double y{0.0};

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);  // lands in [-pi, pi]
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Planar pose; theta is kept in (-pi, pi] by every operation that returns one.
struct Pose2D {
    double x{0.0};
    double y{0.0};
    double theta{0.0};

    Pose2D() = default;
    Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(theta_) {}

    Vec2 position() const { return {x, y}; }

    /// Maps a point from this pose's local frame to the world frame.
    Vec2 transform(const Vec2& local) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {x + c * local.x - s * local.y, y + s * local.x + c * local.y};
    }

    /// Maps a world point into this pose's local frame.
    Vec2 inverse_transform(const Vec2& world) const {
        const double c = std::cos(theta), s = std::sin(theta);
        const double dx = world.x - x, dy = world.y - y;
        return {c * dx + s * dy, -s * dx + c * dy};
    }

    friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Absolute angular separation, wrapped through the cut; always in [0, pi].
inline double angle_between(double a, double b) {
    return std::fabs(wrap_angle(a - b));
}

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    if (len2 == 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

}  // namespace covy
