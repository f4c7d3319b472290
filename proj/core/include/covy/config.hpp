#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "covy/amcl.hpp"
#include "covy/ddpg.hpp"
#include "covy/detection.hpp"
#include "covy/hybrid.hpp"
#include "covy/sac.hpp"
#include "covy/scan_match.hpp"
#include "covy/tracker.hpp"
#include "covy/training.hpp"

namespace covy {

/// Every tunable in one layered bundle: code defaults, overridden by an
/// optional JSON file, overridden by dotted-path CLI --set entries.
struct Config {
    // Sensing.
    LidarConfig nav_lidar{10, -kPi / 2, kPi / 2, 6.0, 0.01};    // agent-facing scan
    LidarConfig full_lidar{361, -kPi, kPi, 6.0, 0.01};          // odometry + AMCL scan
    DetectorProfile rgbd{SensorMode::RGBD, 6.0, deg_to_rad(87.0), 0.05, 0.03, true, 0.0};
    DetectorProfile rgb{SensorMode::RGB, 20.0, deg_to_rad(70.0), 0.20, 0.06, true, 0.0};

    // Perception pipeline.
    TrackerParams tracker;
    double breach_threshold{1.5};
    int breach_window{20};

    // Localization.
    AmclParams amcl;
    std::size_t amcl_particles{500};
    ScanMatchParams scan_match;

    // Learning.
    RewardParams reward;
    DdpgParams ddpg;
    SacParams sac;
    TrainingConfig training;
    std::string agent{"sac"};

    // Hybrid controller.
    HybridConfig hybrid;

    std::uint64_t seed{1};

    /// Merges a partial JSON document over the current values; unknown keys
    /// raise std::invalid_argument so typos do not pass silently.
    void apply_json(const nlohmann::json& j);

    /// Applies one dotted override, e.g. "sac.hidden=[64,64]" or
    /// "reward.goal_radius=0.3".
    void apply_override(const std::string& assignment);
};

/// Code defaults, then the file (when non-empty), in that order.
Config load_config(const std::string& path);

}  // namespace covy
