#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covy/world.hpp"

namespace covy {

/// Episode limits shared by training and evaluation runs.
struct EpisodeLimits {
    int max_steps{500};
    double dt{0.1};
};

/// A fully validated world setup. The seed determines every stochastic draw
/// in a run that starts from this scenario.
struct Scenario {
    WorldMap map;
    Pose2D robot_start;
    double robot_radius{0.11};
    double v_max{0.2};
    double w_max{2.0};
    Vec2 goal;
    std::vector<PedestrianAgent> pedestrians;
    EpisodeLimits limits;
    std::uint64_t seed{0};

    RobotState initial_robot() const {
        RobotState r;
        r.pose = robot_start;
        r.radius = robot_radius;
        r.v_max = v_max;
        r.w_max = w_max;
        return r;
    }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Parses and validates a scenario file (JSON with sections
/// map/robot/goal/pedestrians/limits/seed; meters and radians throughout).
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

std::string scenario_to_json_text(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace covy
