#include "covy/hybrid.hpp"

#include <cmath>
#include <stdexcept>

namespace covy {

void HybridConfig::validate() const {
    if (check_interval < 1) throw std::invalid_argument("hybrid.check_interval must be >= 1");
    if (!(pos_threshold > 0.0)) throw std::invalid_argument("hybrid.pos_threshold must be > 0");
    if (!(heading_threshold > 0.0))
        throw std::invalid_argument("hybrid.heading_threshold must be > 0");
    if (amcl_step_cost_s < 0.0) throw std::invalid_argument("hybrid.amcl_step_cost_s must be >= 0");
}

std::pair<double, double> pose_divergence(const Pose2D& odom, const Pose2D& amcl) {
    return {distance(odom.position(), amcl.position()), angle_between(odom.theta, amcl.theta)};
}

const char* to_string(EpisodeOutcome::Kind kind) {
    switch (kind) {
        case EpisodeOutcome::Kind::Success: return "success";
        case EpisodeOutcome::Kind::Collision: return "collision";
        case EpisodeOutcome::Kind::Lost: return "lost";
    }
    return "lost";
}

EpisodeOutcome classify_episode(const EpisodeTrace& trace) {
    EpisodeOutcome outcome;
    outcome.steps = static_cast<int>(trace.steps.size());
    outcome.path_length = trace.path_length;
    outcome.elapsed_s = trace.elapsed_s;
    for (const HybridStepRecord& r : trace.steps) {
        if (r.true_goal_distance < trace.goal_radius) {
            outcome.kind = EpisodeOutcome::Kind::Success;
            outcome.steps = static_cast<int>(r.step);
            return outcome;
        }
        if (r.collision) {
            outcome.kind = EpisodeOutcome::Kind::Collision;
            outcome.steps = static_cast<int>(r.step);
            return outcome;
        }
    }
    outcome.kind = EpisodeOutcome::Kind::Lost;
    return outcome;
}

HybridController::HybridController(Scenario scenario, RewardParams reward, HybridConfig config,
                                   AmclParams amcl_params, LidarConfig full_scan,
                                   std::size_t particle_count)
    : scenario_(std::move(scenario)),
      reward_(reward),
      config_(config),
      amcl_params_(amcl_params),
      full_scan_(full_scan),
      particle_count_(particle_count),
      distance_field_(scenario_.map.rasterize()) {
    config_.validate();
    reward_.validate();
    reward_.max_steps = scenario_.limits.max_steps;
    robot_ = scenario_.initial_robot();
    pedestrians_ = scenario_.pedestrians;
    believed_ = robot_.pose;
    goal_ = scenario_.goal;
}

bool HybridController::set_target(const BreachReport& breach) {
    if (!breach.target.has_value()) return false;
    goal_ = believed_.transform(*breach.target);
    return true;
}

EpisodeTrace HybridController::run_episode(AnyAgent& agent, Rng& rng, bool randomize_start_goal,
                                           const FaultConfig& fault) {
    const WorldMap& map = scenario_.map;
    const double dt = scenario_.limits.dt;
    const bool hybrid = config_.mode == HybridConfig::Mode::Hybrid;

    // Separate substreams: the filter's sampling must not perturb the world
    // or the policy, so pure and hybrid runs of the same seed share one
    // trajectory as long as no reinit fires.
    const std::uint64_t episode_key = rng.next_u64();
    Rng world_rng(derive_seed(episode_key, 1));
    Rng loc_rng(derive_seed(episode_key, 2));
    Rng policy_rng(derive_seed(episode_key, 3));

    robot_ = scenario_.initial_robot();
    pedestrians_ = scenario_.pedestrians;
    goal_ = scenario_.goal;
    if (randomize_start_goal) {
        NavEnv sampler(scenario_, reward_, full_scan_);
        const double clearance = robot_.radius + reward_.min_clearance;
        robot_.pose = sampler.sample_free_pose(world_rng, clearance);
        const double min_separation =
            0.25 * std::min(map.bounds.width(), map.bounds.height());
        for (int attempt = 0; attempt < 10000; ++attempt) {
            const Pose2D g = sampler.sample_free_pose(world_rng, clearance + 0.1);
            if (distance(g.position(), robot_.pose.position()) >= min_separation) {
                goal_ = g.position();
                break;
            }
        }
    }
    believed_ = robot_.pose;  // odometry starts from the known start pose

    EpisodeTrace trace;
    trace.goal = goal_;
    trace.goal_radius = reward_.goal_radius;
    trace.dt = dt;

    ParticleSet particles;
    if (hybrid) {
        particles = init_particles_gaussian(believed_, 0.05, 0.05, particle_count_, loc_rng);
    }

    LidarScan prev_scan = cast_lidar(map, pedestrians_, robot_.pose, full_scan_, world_rng, 0);
    Eigen::VectorXd state = build_state(prev_scan, robot_, goal_, map);
    PoseDelta last_delta;
    double prev_believed_distance = distance(believed_.position(), goal_);
    int believed_goal_hold = 0;

    for (std::int64_t step = 1; step <= scenario_.limits.max_steps; ++step) {
        const Eigen::Vector2d action = agent.act(state, false, policy_rng);

        const Vec2 before = robot_.pose.position();
        robot_ = step_robot(robot_, action(0), action(1), dt);
        pedestrians_ = step_pedestrians(pedestrians_, dt);
        trace.path_length += distance(before, robot_.pose.position());
        trace.elapsed_s += dt + (hybrid ? config_.amcl_step_cost_s : 0.0);

        const LidarScan scan =
            cast_lidar(map, pedestrians_, robot_.pose, full_scan_, world_rng, step);

        HybridStepRecord rec;
        rec.step = step;
        rec.true_pose = robot_.pose;
        rec.v_cmd = robot_.v;
        rec.w_cmd = robot_.w;

        PoseDelta raw_delta;
        try {
            raw_delta = scan_match(prev_scan, scan, last_delta);
        } catch (const DegenerateScanError&) {
            trace.end = EndReason::LocalizationAbort;
            trace.steps.push_back(rec);
            return trace;
        }
        last_delta = raw_delta;
        const PoseDelta used_delta = inject_fault(raw_delta, fault, step);
        believed_ = integrate_odometry(believed_, used_delta);

        Pose2D amcl_mean = believed_;
        if (hybrid) {
            const PoseDelta filter_delta = config_.fault_affects_amcl ? used_delta : raw_delta;
            const AmclUpdateResult ar = amcl_update(particles, filter_delta, scan, map,
                                                    distance_field_, amcl_params_, loc_rng);
            if (ar.recovery_injected) {
                ++trace.recovery_events;
                rec.recovery = true;
            }
            const auto [mean, cov] = estimate_pose(particles);
            amcl_mean = mean;
            rec.amcl_cov_trace = cov[0][0] + cov[1][1] + cov[2][2];

            if (step % config_.check_interval == 0) {
                const auto [d_pos, d_theta] = pose_divergence(believed_, amcl_mean);
                if (d_pos > config_.pos_threshold || d_theta > config_.heading_threshold) {
                    believed_ = amcl_mean;
                    rec.reinit = true;
                    ++trace.reinit_events;
                }
            }
        }
        rec.believed_pose = believed_;
        rec.amcl_mean = amcl_mean;

        const double true_distance = distance(robot_.pose.position(), goal_);
        const double believed_distance = distance(believed_.position(), goal_);
        rec.true_goal_distance = true_distance;
        rec.collision = check_collision(map, pedestrians_, robot_.pose, robot_.radius);
        rec.reward =
            compute_reward(prev_believed_distance, believed_distance, scan, step, reward_).reward;
        prev_believed_distance = believed_distance;
        trace.steps.push_back(rec);

        if (true_distance < reward_.goal_radius) {
            trace.end = EndReason::TrueGoal;
            return trace;
        }
        if (rec.collision) {
            trace.end = EndReason::Collision;
            return trace;
        }
        // A controller that believes it has firmly arrived holds its mission
        // complete; sustained belief without true arrival ends the episode
        // as a deadlock. One full check cycle of grace lets the hybrid mode
        // correct a wrong belief first.
        believed_goal_hold =
            believed_distance < config_.believed_goal_fraction * reward_.goal_radius
                ? believed_goal_hold + 1
                : 0;
        if (believed_goal_hold >= config_.check_interval) {
            trace.end = EndReason::BelievedGoal;
            return trace;
        }

        RobotState believed_robot = robot_;
        believed_robot.pose = believed_;
        state = build_state(scan, believed_robot, goal_, map);
        prev_scan = scan;
    }
    trace.end = EndReason::StepBudget;
    return trace;
}

}  // namespace covy
