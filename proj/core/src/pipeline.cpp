#include "covy/pipeline.hpp"

namespace covy {

VisionPipeline::VisionPipeline(DetectorProfile rgbd, DetectorProfile rgb,
                               TrackerParams tracker_params, double breach_threshold,
                               int breach_window, PipelineMode mode)
    : rgbd_(rgbd),
      rgb_(rgb),
      tracker_(tracker_params),
      breach_threshold_(breach_threshold),
      breach_window_(breach_window),
      mode_(mode) {}

VisionFrame VisionPipeline::step(const WorldMap& map,
                                 const std::vector<PedestrianAgent>& pedestrians,
                                 const Pose2D& robot_pose, Rng& rng) {
    VisionFrame out;

    const DetectorProfile* active = &rgbd_;
    if (mode_ == PipelineMode::RgbOnly) {
        active = &rgb_;
        out.detections = emulate_detections(map, pedestrians, robot_pose, rgb_, rng, frame_);
    } else {
        out.detections = emulate_detections(map, pedestrians, robot_pose, rgbd_, rng, frame_);
        if (mode_ == PipelineMode::Compound && select_mode(out.detections) == SensorMode::RGB) {
            active = &rgb_;
            out.detections = emulate_detections(map, pedestrians, robot_pose, rgb_, rng, frame_);
        }
    }
    out.active_mode = active->mode;

    // Measurement noise follows the stage's error curve: per-axis variance of
    // the isotropic noise with mean radial error ale(d) is ale(d)^2 * 2/pi.
    std::vector<double> meas_vars;
    meas_vars.reserve(out.detections.size());
    for (const DetectionObservation& det : out.detections) {
        const double ale = active->ale(det.position_robot_frame.norm());
        meas_vars.push_back(ale * ale * 2.0 / kPi);
    }

    const std::vector<Track>& tracks = tracker_.update(out.detections, meas_vars);
    out.report = detect_breaches(tracks, breach_threshold_, breach_window_, frame_);
    ++frame_;
    return out;
}

}  // namespace covy
