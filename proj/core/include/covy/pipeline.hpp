#pragma once

#include <optional>

#include "covy/breach.hpp"
#include "covy/detection.hpp"
#include "covy/tracker.hpp"

namespace covy {

/// Which detection stages a pipeline may use.
enum class PipelineMode { Compound, RgbdOnly, RgbOnly };

struct VisionFrame {
    SensorMode active_mode{SensorMode::RGBD};
    std::vector<DetectionObservation> detections;
    BreachReport report;
};

/// Two-stage breach-detection pipeline: a short-range high-accuracy stage
/// and a long-range fallback engaged whenever the first stage sees no one,
/// feeding the tracker and the window-averaged breach classifier.
class VisionPipeline {
public:
    VisionPipeline(DetectorProfile rgbd, DetectorProfile rgb, TrackerParams tracker_params,
                   double breach_threshold, int breach_window,
                   PipelineMode mode = PipelineMode::Compound);

    /// Runs one frame: emulate detections, pick the stage, track, classify.
    VisionFrame step(const WorldMap& map, const std::vector<PedestrianAgent>& pedestrians,
                     const Pose2D& robot_pose, Rng& rng);

    const SortTracker& tracker() const { return tracker_; }
    void reset() { tracker_.reset(); frame_ = 0; }

    double breach_threshold() const { return breach_threshold_; }
    int breach_window() const { return breach_window_; }

private:
    DetectorProfile rgbd_;
    DetectorProfile rgb_;
    SortTracker tracker_;
    double breach_threshold_;
    int breach_window_;
    PipelineMode mode_;
    std::int64_t frame_{0};
};

}  // namespace covy
