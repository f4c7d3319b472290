#include "covy/scan_match.hpp"

#include <cmath>
#include <unordered_map>
#include <vector>

namespace covy {

PoseDelta compose(const PoseDelta& first, const PoseDelta& second) {
    const double c = std::cos(first.dtheta), s = std::sin(first.dtheta);
    PoseDelta out;
    out.dx = first.dx + c * second.dx - s * second.dy;
    out.dy = first.dy + s * second.dx + c * second.dy;
    out.dtheta = wrap_angle(first.dtheta + second.dtheta);
    return out;
}

Pose2D integrate_odometry(const Pose2D& pose, const PoseDelta& delta) {
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    return {pose.x + c * delta.dx - s * delta.dy, pose.y + s * delta.dx + c * delta.dy,
            wrap_angle(pose.theta + delta.dtheta)};
}

namespace {

struct ScanCloud {
    std::vector<Vec2> points;
    std::vector<int> beam;  // original beam index per point
};

ScanCloud scan_points(const LidarScan& scan) {
    ScanCloud cloud;
    cloud.points.reserve(scan.ranges.size());
    for (int i = 0; i < scan.beam_count; ++i) {
        const double r = scan.ranges[i];
        if (r >= scan.max_range - 1e-9) continue;  // no-hit beam
        const double a = scan.beam_angle(i);
        cloud.points.emplace_back(r * std::cos(a), r * std::sin(a));
        cloud.beam.push_back(i);
    }
    return cloud;
}

// Surfaces between adjacent beams longer than this are depth discontinuities,
// not walls; never project onto them.
constexpr double kMaxSurfaceSegment = 0.2;

/// Projects q onto the local surface around reference point j: the better of
/// the segments to j's immediate beam neighbors, falling back to the point
/// itself. This removes the beam-quantization bias a raw nearest-point match
/// carries on flat walls.
Vec2 project_to_surface(const ScanCloud& ref, std::size_t j, const Vec2& q) {
    Vec2 best = ref.points[j];
    double best_d2 = (q - best).squared_norm();
    const auto try_segment = [&](std::size_t a, std::size_t b) {
        if ((ref.points[a] - ref.points[b]).norm() > kMaxSurfaceSegment) return;
        if (std::abs(ref.beam[a] - ref.beam[b]) > 2) return;  // gap in the scan
        const Vec2 ab = ref.points[b] - ref.points[a];
        const double len2 = ab.squared_norm();
        if (len2 < 1e-12) return;
        double t = (q - ref.points[a]).dot(ab) / len2;
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 p = ref.points[a] + ab * t;
        const double d2 = (q - p).squared_norm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = p;
        }
    };
    if (j > 0) try_segment(j - 1, j);
    if (j + 1 < ref.points.size()) try_segment(j, j + 1);
    return best;
}

/// Uniform-grid index over a point cloud for approximate nearest neighbors.
class PointGrid {
public:
    PointGrid(const std::vector<Vec2>& pts, double cell) : pts_(pts), cell_(cell) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            buckets_[key(pts[i])].push_back(i);
        }
    }

    /// Nearest point within `limit`; -1 if none.
    int nearest(const Vec2& q, double limit) const {
        const int reach = static_cast<int>(std::ceil(limit / cell_));
        const int cx = static_cast<int>(std::floor(q.x / cell_));
        const int cy = static_cast<int>(std::floor(q.y / cell_));
        int best = -1;
        double best_d2 = limit * limit;
        for (int dx = -reach; dx <= reach; ++dx) {
            for (int dy = -reach; dy <= reach; ++dy) {
                const auto it = buckets_.find(pack(cx + dx, cy + dy));
                if (it == buckets_.end()) continue;
                for (std::size_t i : it->second) {
                    const double d2 = (pts_[i] - q).squared_norm();
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = static_cast<int>(i);
                    }
                }
            }
        }
        return best;
    }

private:
    static std::int64_t pack(int x, int y) {
        return (static_cast<std::int64_t>(x) << 32) ^ (static_cast<std::uint32_t>(y));
    }
    std::int64_t key(const Vec2& p) const {
        return pack(static_cast<int>(std::floor(p.x / cell_)),
                    static_cast<int>(std::floor(p.y / cell_)));
    }

    const std::vector<Vec2>& pts_;
    double cell_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace

PoseDelta scan_match(const LidarScan& prev, const LidarScan& cur, const PoseDelta& init,
                     const ScanMatchParams& params) {
    if (params.max_iter < 1) throw std::invalid_argument("scan_match: max_iter must be >= 1");
    const ScanCloud ref = scan_points(prev);
    const ScanCloud src = scan_points(cur);
    if (ref.points.size() < 3 || src.points.size() < 3)
        throw DegenerateScanError("scan_match: fewer than 3 valid points");

    const PointGrid grid(ref.points, 0.15);

    double tx = init.dx, ty = init.dy, th = init.dtheta;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        const double c = std::cos(th), s = std::sin(th);

        // Pair each transformed source point with the local surface around
        // its nearest reference point.
        std::vector<Vec2> a;  // matched source (untransformed)
        std::vector<Vec2> b;  // matched reference surface point
        a.reserve(src.points.size());
        b.reserve(src.points.size());
        for (const Vec2& p : src.points) {
            const Vec2 moved{tx + c * p.x - s * p.y, ty + s * p.x + c * p.y};
            const int j = grid.nearest(moved, params.correspondence_limit);
            if (j < 0) continue;
            a.push_back(p);
            b.push_back(project_to_surface(ref, static_cast<std::size_t>(j), moved));
        }
        if (a.size() < 3) break;

        // Trim the worst residuals: points seen in only one of the two scans
        // (occlusion boundaries) otherwise drag the alignment.
        if (params.trim_fraction > 0.0 && a.size() > 10) {
            std::vector<std::size_t> order(a.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::vector<double> residual(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                const Vec2 moved{tx + c * a[i].x - s * a[i].y, ty + s * a[i].x + c * a[i].y};
                residual[i] = (moved - b[i]).squared_norm();
            }
            std::sort(order.begin(), order.end(),
                      [&](std::size_t l, std::size_t r) { return residual[l] < residual[r]; });
            const std::size_t keep =
                std::max<std::size_t>(3, static_cast<std::size_t>(
                                             a.size() * (1.0 - params.trim_fraction)));
            std::vector<Vec2> ta, tb;
            ta.reserve(keep);
            tb.reserve(keep);
            for (std::size_t i = 0; i < keep; ++i) {
                ta.push_back(a[order[i]]);
                tb.push_back(b[order[i]]);
            }
            a.swap(ta);
            b.swap(tb);
        }

        // Closed-form 2D rigid alignment (Horn) of a onto b.
        Vec2 ca{0, 0}, cb{0, 0};
        for (std::size_t i = 0; i < a.size(); ++i) {
            ca += a[i];
            cb += b[i];
        }
        ca = ca * (1.0 / a.size());
        cb = cb * (1.0 / b.size());
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const Vec2 pa = a[i] - ca;
            const Vec2 pb = b[i] - cb;
            sxx += pa.dot(pb);
            sxy += pa.cross(pb);
        }
        const double new_th = std::atan2(sxy, sxx);
        const double nc = std::cos(new_th), ns = std::sin(new_th);
        const double new_tx = cb.x - (nc * ca.x - ns * ca.y);
        const double new_ty = cb.y - (ns * ca.x + nc * ca.y);

        const double change = std::fabs(new_tx - tx) + std::fabs(new_ty - ty) +
                              std::fabs(wrap_angle(new_th - th));
        tx = new_tx;
        ty = new_ty;
        th = new_th;
        if (change < params.tol) break;
    }
    return {tx, ty, wrap_angle(th)};
}

PoseDelta inject_fault(const PoseDelta& delta, const FaultConfig& cfg, std::int64_t step) {
    if (!cfg.enabled) return delta;
    PoseDelta out = delta;
    out.dx += cfg.per_step_bias.dx;
    out.dy += cfg.per_step_bias.dy;
    out.dtheta = wrap_angle(out.dtheta + cfg.per_step_bias.dtheta);
    if (step == cfg.trigger_step) {
        out.dx += cfg.jump.dx;
        out.dy += cfg.jump.dy;
        out.dtheta = wrap_angle(out.dtheta + cfg.jump.dtheta);
    }
    return out;
}

}  // namespace covy
