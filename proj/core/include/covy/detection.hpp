#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "covy/world.hpp"

namespace covy {

enum class SensorMode { RGBD, RGB };

const char* to_string(SensorMode mode);

/// Calibrated stand-in for one detection stage. Localization noise follows a
/// linear error curve ale(d) = a + b*d (mean absolute radial error at
/// distance d); detection is all-or-nothing at max_range unless a logistic
/// falloff is configured.
struct DetectorProfile {
    SensorMode mode{SensorMode::RGBD};
    double max_range{6.0};
    double fov{deg_to_rad(87.0)};
    double ale_intercept{0.05};  // a, meters
    double ale_slope{0.03};      // b, meters per meter
    bool occlusion_enabled{true};
    // Optional logistic falloff of detection probability near max_range;
    // 0 keeps the sharp cutoff.
    double detect_falloff_width{0.0};

    double ale(double d) const { return ale_intercept + ale_slope * d; }

    double detect_prob(double d) const {
        if (d > max_range) return 0.0;
        if (detect_falloff_width <= 0.0) return 1.0;
        return 1.0 / (1.0 + std::exp((d - max_range) / detect_falloff_width + 4.0));
    }

    void validate() const;
};

struct DetectionObservation {
    Vec2 position_robot_frame;
    double confidence{1.0};
    std::int64_t frame{0};
    SensorMode mode{SensorMode::RGBD};
};

/// Emulates one detection pass over the true pedestrian states. A pedestrian
/// is visible when it is within range and field of view and, with occlusion
/// enabled, no map obstacle blocks the sight ray. Visible pedestrians are
/// reported with probability detect_prob(d); the reported position is the
/// true robot-frame position plus isotropic Gaussian noise with per-axis
/// sigma ale(d)/sqrt(pi/2), which makes the mean radial error equal ale(d).
/// No false positives are generated.
std::vector<DetectionObservation> emulate_detections(const WorldMap& map,
                                                     const std::vector<PedestrianAgent>& pedestrians,
                                                     const Pose2D& robot_pose,
                                                     const DetectorProfile& profile, Rng& rng,
                                                     std::int64_t frame = 0);

/// Compound switching rule: stay on RGBD while it sees anyone, else RGB.
SensorMode select_mode(const std::vector<DetectionObservation>& rgbd_detections);

}  // namespace covy
