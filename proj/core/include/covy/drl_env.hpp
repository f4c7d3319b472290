#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "covy/scenario.hpp"
#include "covy/world.hpp"

namespace covy {

inline constexpr int kStateDim = 14;
inline constexpr int kActionDim = 2;
inline constexpr int kStateLidarBeams = 10;

/// Velocity command box. Linear velocity is forward-only.
struct ActionBox {
    double v_max{0.2};
    double w_max{2.0};

    /// Normalized [-1, 1]^2 -> (v, w).
    Eigen::Vector2d denormalize(const Eigen::Vector2d& a) const {
        return {0.5 * v_max * (std::clamp(a(0), -1.0, 1.0) + 1.0),
                w_max * std::clamp(a(1), -1.0, 1.0)};
    }
    Eigen::Vector2d normalize(double v, double w) const {
        return {std::clamp(2.0 * v / v_max - 1.0, -1.0, 1.0), std::clamp(w / w_max, -1.0, 1.0)};
    }
};

/// 14-entry agent observation: 10 downsampled front-semicircle ranges
/// normalized by max_range, current v and w, distance to target and wrapped
/// heading to target. The scan must offer at least 10 beams covering
/// [-90, 90] degrees.
Eigen::VectorXd build_state(const LidarScan& scan, const RobotState& robot, const Vec2& target,
                            const WorldMap& map);

enum class Terminal { None, Goal, Collision, Timeout };

const char* to_string(Terminal t);

struct RewardParams {
    double r_arrive{100.0};     // goal reward
    double r_collide{-100.0};   // collision penalty
    double r_progress{500.0};   // gain per meter of approach
    double r_stall{-1.0};       // penalty when not approaching
    double goal_radius{0.3};    // C_d, meters
    double min_clearance{0.2};  // collision lidar threshold, meters
    int max_steps{500};

    void validate() const;
};

struct RewardResult {
    double reward{0.0};
    Terminal terminal{Terminal::None};
};

/// Four-case reward, evaluated in priority order: goal, collision, progress,
/// stall. Reaching the step budget turns a progress/stall step into a
/// timeout terminal without changing the reward.
RewardResult compute_reward(double prev_distance, double cur_distance, const LidarScan& scan,
                            std::int64_t step, const RewardParams& params);

/// Episode world for agent training and frozen-policy evaluation: steps the
/// robot and pedestrians, casts the 10-beam front scan and scores rewards.
class NavEnv {
public:
    NavEnv(Scenario scenario, RewardParams reward, LidarConfig lidar);

    /// Resets to the scenario's start/goal, or samples a fresh collision-free
    /// pair when randomize is true.
    Eigen::VectorXd reset(Rng& rng, bool randomize_start_goal);

    struct StepResult {
        Eigen::VectorXd state;
        double reward{0.0};
        Terminal terminal{Terminal::None};
    };
    StepResult step(const Eigen::Vector2d& action_env, Rng& rng);

    const RobotState& robot() const { return robot_; }
    const Vec2& goal() const { return goal_; }
    const Scenario& scenario() const { return scenario_; }
    const RewardParams& reward_params() const { return reward_; }
    double distance_to_goal() const { return distance(robot_.pose.position(), goal_); }
    std::int64_t step_index() const { return step_; }

    /// Collision-free pose with clearance, used for start/goal sampling.
    Pose2D sample_free_pose(Rng& rng, double clearance) const;

private:
    Scenario scenario_;
    RewardParams reward_;
    LidarConfig lidar_;
    RobotState robot_;
    Vec2 goal_;
    std::vector<PedestrianAgent> pedestrians_;
    double prev_distance_{0.0};
    std::int64_t step_{0};
};

}  // namespace covy
