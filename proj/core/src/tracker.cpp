#include "covy/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "covy/hungarian.hpp"

namespace covy {

namespace {

Eigen::Matrix4d transition_matrix() {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = 1.0;  // one frame per step
    f(1, 3) = 1.0;
    return f;
}

}  // namespace

SortTracker::SortTracker(TrackerParams params) : params_(params) {}

void SortTracker::reset() {
    tracks_.clear();
    next_id_ = 1;
}

void SortTracker::seed_track(const Track& track) {
    tracks_.push_back(track);
    next_id_ = std::max(next_id_, track.id + 1);
}

void SortTracker::predict_all() {
    static const Eigen::Matrix4d f = transition_matrix();
    const Eigen::Matrix4d q = Eigen::Matrix4d::Identity() * params_.process_noise_var;
    for (Track& t : tracks_) {
        t.state = f * t.state;
        t.covariance = f * t.covariance * f.transpose() + q;
        // Symmetrize to keep the covariance PSD under roundoff.
        t.covariance = 0.5 * (t.covariance + t.covariance.transpose()).eval();
        t.age += 1;
    }
}

const std::vector<Track>& SortTracker::update(const std::vector<DetectionObservation>& detections,
                                              const std::vector<double>& measurement_vars) {
    predict_all();

    const int n_tracks = static_cast<int>(tracks_.size());
    const int n_dets = static_cast<int>(detections.size());

    std::vector<int> det_for_track(n_tracks, -1);
    std::vector<char> det_used(n_dets, 0);

    if (n_tracks > 0 && n_dets > 0) {
        CostMatrix cost;
        cost.rows = n_tracks;
        cost.cols = n_dets;
        cost.cost.resize(static_cast<std::size_t>(n_tracks) * n_dets);
        for (int r = 0; r < n_tracks; ++r) {
            for (int c = 0; c < n_dets; ++c) {
                cost.at(r, c) = distance(tracks_[r].position(),
                                         detections[c].position_robot_frame);
            }
        }
        for (const auto& [r, c] : hungarian_assign(cost)) {
            // Gate widens with the detection's own noise scale so long-range
            // stages do not shed every noisy match.
            double limit = params_.gate;
            if (!measurement_vars.empty()) {
                limit = std::max(limit, params_.gate_sigma_scale * std::sqrt(measurement_vars[c]));
            }
            if (cost.at(r, c) > limit) continue;
            det_for_track[r] = c;
            det_used[c] = 1;
        }
    }

    static const Eigen::Matrix<double, 2, 4> h = [] {
        Eigen::Matrix<double, 2, 4> m = Eigen::Matrix<double, 2, 4>::Zero();
        m(0, 0) = 1.0;
        m(1, 1) = 1.0;
        return m;
    }();

    for (int r = 0; r < n_tracks; ++r) {
        Track& t = tracks_[r];
        if (det_for_track[r] < 0) {
            t.consecutive_hits = 0;
            continue;
        }
        const DetectionObservation& det = detections[det_for_track[r]];
        double var = params_.measurement_var_floor;
        if (!measurement_vars.empty()) {
            var = std::max(var, measurement_vars[det_for_track[r]]);
        }
        const Eigen::Matrix2d rm = Eigen::Matrix2d::Identity() * var;
        const Eigen::Vector2d z{det.position_robot_frame.x, det.position_robot_frame.y};

        const Eigen::Vector2d innovation = z - h * t.state;
        const Eigen::Matrix2d s = h * t.covariance * h.transpose() + rm;
        const Eigen::Matrix<double, 4, 2> k = t.covariance * h.transpose() * s.inverse();
        t.state += k * innovation;
        const Eigen::Matrix4d i_kh = Eigen::Matrix4d::Identity() - k * h;
        // Joseph form keeps the covariance PSD for any gain.
        t.covariance = (i_kh * t.covariance * i_kh.transpose() + k * rm * k.transpose()).eval();
        t.covariance = 0.5 * (t.covariance + t.covariance.transpose()).eval();

        t.hits += 1;
        t.consecutive_hits += 1;
        t.age = 0;
        t.position_history.push_back(t.position());
        while (static_cast<int>(t.position_history.size()) > params_.history_window) {
            t.position_history.pop_front();
        }
    }

    for (int c = 0; c < n_dets; ++c) {
        if (det_used[c]) continue;
        Track t;
        t.id = next_id_++;
        t.state << detections[c].position_robot_frame.x, detections[c].position_robot_frame.y,
            0.0, 0.0;
        t.covariance = Eigen::Matrix4d::Zero();
        t.covariance(0, 0) = t.covariance(1, 1) = params_.initial_position_var;
        t.covariance(2, 2) = t.covariance(3, 3) = params_.initial_velocity_var;
        t.hits = 1;
        t.consecutive_hits = 1;
        t.age = 0;
        t.position_history.push_back(t.position());
        tracks_.push_back(std::move(t));
    }

    std::erase_if(tracks_, [&](const Track& t) { return t.age > params_.max_age; });
    return tracks_;
}

std::vector<const Track*> SortTracker::confirmed_tracks() const {
    std::vector<const Track*> out;
    for (const Track& t : tracks_) {
        if (t.confirmed(params_.min_hits)) out.push_back(&t);
    }
    return out;
}

}  // namespace covy
