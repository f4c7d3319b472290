#include "covy/drl_env.hpp"

#include <cmath>
#include <stdexcept>

namespace covy {

const char* to_string(Terminal t) {
    switch (t) {
        case Terminal::None: return "none";
        case Terminal::Goal: return "goal";
        case Terminal::Collision: return "collision";
        case Terminal::Timeout: return "timeout";
    }
    return "none";
}

Eigen::VectorXd build_state(const LidarScan& scan, const RobotState& robot, const Vec2& target,
                            const WorldMap& map) {
    if (!map.bounds.contains(target))
        throw std::invalid_argument("build_state: target outside map bounds");

    // Front-semicircle beams, with a small slack for grid-spaced layouts.
    constexpr double kHalf = kPi / 2.0 + 1e-9;
    std::vector<int> front;
    front.reserve(scan.beam_count);
    for (int i = 0; i < scan.beam_count; ++i) {
        const double a = scan.beam_angle(i);
        if (a >= -kHalf && a <= kHalf) front.push_back(i);
    }
    if (static_cast<int>(front.size()) < kStateLidarBeams)
        throw std::invalid_argument("build_state: scan must cover [-90, 90] deg with >= 10 beams");

    Eigen::VectorXd state(kStateDim);
    const int m = static_cast<int>(front.size());
    for (int k = 0; k < kStateLidarBeams; ++k) {
        // Evenly indexed selection, first and last beam included.
        const int idx = front[static_cast<int>(
            std::lround(static_cast<double>(k) * (m - 1) / (kStateLidarBeams - 1)))];
        state(k) = std::clamp(scan.ranges[idx] / scan.max_range, 0.0, 1.0);
    }
    state(10) = robot.v;
    state(11) = robot.w;
    const Vec2 to_target = target - robot.pose.position();
    state(12) = to_target.norm();
    state(13) = wrap_angle(std::atan2(to_target.y, to_target.x) - robot.pose.theta);
    return state;
}

void RewardParams::validate() const {
    if (!(r_arrive > 0.0)) throw std::invalid_argument("reward.r_arrive must be > 0");
    if (!(r_collide < 0.0)) throw std::invalid_argument("reward.r_collide must be < 0");
    if (!(r_progress > 0.0)) throw std::invalid_argument("reward.r_progress must be > 0");
    if (r_stall > 0.0) throw std::invalid_argument("reward.r_stall must be <= 0");
    if (!(goal_radius > 0.0)) throw std::invalid_argument("reward.goal_radius must be > 0");
    if (!(min_clearance > 0.0)) throw std::invalid_argument("reward.min_clearance must be > 0");
    if (max_steps < 1) throw std::invalid_argument("reward.max_steps must be >= 1");
}

RewardResult compute_reward(double prev_distance, double cur_distance, const LidarScan& scan,
                            std::int64_t step, const RewardParams& params) {
    if (cur_distance < params.goal_radius) {
        return {params.r_arrive, Terminal::Goal};
    }
    if (scan.min_range() < params.min_clearance) {
        return {params.r_collide, Terminal::Collision};
    }
    const double progress = prev_distance - cur_distance;
    RewardResult result;
    result.reward = progress > 0.0 ? params.r_progress * progress : params.r_stall;
    result.terminal = step >= params.max_steps ? Terminal::Timeout : Terminal::None;
    return result;
}

NavEnv::NavEnv(Scenario scenario, RewardParams reward, LidarConfig lidar)
    : scenario_(std::move(scenario)), reward_(reward), lidar_(lidar) {
    reward_.validate();
    reward_.max_steps = scenario_.limits.max_steps;
    robot_ = scenario_.initial_robot();
    goal_ = scenario_.goal;
    pedestrians_ = scenario_.pedestrians;
}

Pose2D NavEnv::sample_free_pose(Rng& rng, double clearance) const {
    const Bounds& b = scenario_.map.bounds;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const Pose2D pose{rng.uniform(b.min_x + clearance, b.max_x - clearance),
                          rng.uniform(b.min_y + clearance, b.max_y - clearance),
                          rng.uniform(-kPi, kPi)};
        if (!check_collision(scenario_.map, pedestrians_, pose, clearance)) return pose;
    }
    throw std::runtime_error("NavEnv: could not sample a collision-free pose");
}

Eigen::VectorXd NavEnv::reset(Rng& rng, bool randomize_start_goal) {
    robot_ = scenario_.initial_robot();
    pedestrians_ = scenario_.pedestrians;
    goal_ = scenario_.goal;
    step_ = 0;

    if (randomize_start_goal) {
        const double clearance = robot_.radius + reward_.min_clearance;
        robot_.pose = sample_free_pose(rng, clearance);
        // Keep start and goal apart so progress shaping has room to work.
        const double min_separation =
            0.25 * std::min(scenario_.map.bounds.width(), scenario_.map.bounds.height());
        for (int attempt = 0; attempt < 10000; ++attempt) {
            const Pose2D g = sample_free_pose(rng, clearance + 0.1);
            if (distance(g.position(), robot_.pose.position()) >= min_separation) {
                goal_ = g.position();
                break;
            }
        }
    }

    prev_distance_ = distance_to_goal();
    const LidarScan scan =
        cast_lidar(scenario_.map, pedestrians_, robot_.pose, lidar_, rng, step_);
    return build_state(scan, robot_, goal_, scenario_.map);
}

NavEnv::StepResult NavEnv::step(const Eigen::Vector2d& action_env, Rng& rng) {
    robot_ = step_robot(robot_, action_env(0), action_env(1), scenario_.limits.dt);
    pedestrians_ = step_pedestrians(pedestrians_, scenario_.limits.dt);
    ++step_;

    const LidarScan scan =
        cast_lidar(scenario_.map, pedestrians_, robot_.pose, lidar_, rng, step_);
    const double cur = distance_to_goal();
    const RewardResult rr = compute_reward(prev_distance_, cur, scan, step_, reward_);
    prev_distance_ = cur;

    StepResult out;
    out.state = build_state(scan, robot_, goal_, scenario_.map);
    out.reward = rr.reward;
    out.terminal = rr.terminal;
    return out;
}

}  // namespace covy
