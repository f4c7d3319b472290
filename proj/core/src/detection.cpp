#include "covy/detection.hpp"

#include <cmath>
#include <stdexcept>

namespace covy {

const char* to_string(SensorMode mode) {
    return mode == SensorMode::RGBD ? "rgbd" : "rgb";
}

void DetectorProfile::validate() const {
    if (!(max_range > 0.0)) throw std::invalid_argument("detector.max_range must be > 0");
    if (!(fov > 0.0) || fov > 2.0 * kPi)
        throw std::invalid_argument("detector.fov must be in (0, 2*pi]");
    if (ale_intercept < 0.0) throw std::invalid_argument("detector.ale_intercept must be >= 0");
    if (ale(0.0) < 0.0 || ale(max_range) < 0.0)
        throw std::invalid_argument("detector ale(d) must be >= 0 over [0, max_range]");
}

namespace {

bool sight_blocked(const WorldMap& map, const Vec2& from, const Vec2& to) {
    const Vec2 diff = to - from;
    const double d = diff.norm();
    if (d < 1e-9) return false;
    const double angle = std::atan2(diff.y, diff.x);
    // Only map obstacles occlude; pedestrians do not block each other.
    const double hit = cast_ray(map, {}, from, angle, d);
    return hit < d - 1e-9;
}

}  // namespace

std::vector<DetectionObservation> emulate_detections(
    const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians, const Pose2D& robot_pose,
    const DetectorProfile& profile, Rng& rng, std::int64_t frame) {
    profile.validate();

    std::vector<DetectionObservation> out;
    const double sigma_scale = 1.0 / std::sqrt(kPi / 2.0);
    for (const PedestrianAgent& ped : pedestrians) {
        const Vec2 local = robot_pose.inverse_transform(ped.position);
        const double d = local.norm();
        if (d > profile.max_range) continue;
        const double bearing = std::atan2(local.y, local.x);
        if (std::fabs(bearing) > profile.fov / 2.0) continue;
        if (profile.occlusion_enabled && sight_blocked(map, robot_pose.position(), ped.position))
            continue;
        const double p = profile.detect_prob(d);
        if (p < 1.0 && rng.uniform() >= p) continue;

        DetectionObservation obs;
        obs.frame = frame;
        obs.mode = profile.mode;
        obs.confidence = p;
        const double sigma = profile.ale(d) * sigma_scale;
        obs.position_robot_frame = local;
        if (sigma > 0.0) {
            obs.position_robot_frame.x += rng.normal(0.0, sigma);
            obs.position_robot_frame.y += rng.normal(0.0, sigma);
        }
        out.push_back(obs);
    }
    return out;
}

SensorMode select_mode(const std::vector<DetectionObservation>& rgbd_detections) {
    return rgbd_detections.empty() ? SensorMode::RGB : SensorMode::RGBD;
}

}  // namespace covy
