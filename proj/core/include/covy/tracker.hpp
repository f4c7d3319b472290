#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include <Eigen/Dense>

#include "covy/detection.hpp"

namespace covy {

struct TrackerParams {
    double initial_position_var{0.1};   // m^2
    double initial_velocity_var{1.0};
    double process_noise_var{0.01};     // per step, every state dim
    double measurement_var_floor{1e-6}; // m^2, keeps R positive
    double gate{1.0};                   // association distance gate floor, meters
    double gate_sigma_scale{3.5};       // widens the gate with measurement sigma
    int max_age{3};                     // frames a track survives unmatched
    int min_hits{3};                    // consecutive matches before confirmed
    int history_window{20};             // ring buffer length W
};

/// One tracked pedestrian: constant-velocity Kalman state on the ground
/// plane plus the position ring buffer used for breach averaging.
struct Track {
    int id{0};
    Eigen::Vector4d state{Eigen::Vector4d::Zero()};        // x, y, vx, vy
    Eigen::Matrix4d covariance{Eigen::Matrix4d::Identity()};
    int hits{0};            // total matched updates
    int consecutive_hits{0};
    int age{0};             // frames since last update
    std::deque<Vec2> position_history;  // last W updated positions

    Vec2 position() const { return {state(0), state(1)}; }
    bool confirmed(int min_hits) const { return consecutive_hits >= min_hits; }
};

/// SORT adapted to ground-plane coordinates: Kalman prediction, Hungarian
/// association on Euclidean distance with a gate, and the usual
/// spawn/expire lifecycle. Track ids are never reused.
class SortTracker {
public:
    explicit SortTracker(TrackerParams params = {});

    /// Runs one predict/associate/update cycle for a single frame of
    /// detections and returns the live tracks (confirmed or not).
    /// `measurement_vars` gives the per-detection position variance (m^2,
    /// per axis); pass empty to use the floor for all.
    const std::vector<Track>& update(const std::vector<DetectionObservation>& detections,
                                     const std::vector<double>& measurement_vars = {});

    const std::vector<Track>& tracks() const { return tracks_; }
    std::vector<const Track*> confirmed_tracks() const;
    const TrackerParams& params() const { return params_; }

    /// Installs an externally built track (state restore and tests).
    void seed_track(const Track& track);

    void reset();

private:
    void predict_all();

    TrackerParams params_;
    std::vector<Track> tracks_;
    int next_id_{1};
};

}  // namespace covy
