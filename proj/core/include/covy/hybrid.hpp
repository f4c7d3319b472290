#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "covy/amcl.hpp"
#include "covy/breach.hpp"
#include "covy/drl_env.hpp"
#include "covy/scan_match.hpp"
#include "covy/scenario.hpp"
#include "covy/training.hpp"

namespace covy {

struct HybridConfig {
    enum class Mode { PureOdom, Hybrid };

    Mode mode{Mode::Hybrid};
    int check_interval{20};                       // X steps between AMCL comparisons
    double pos_threshold{0.3};                    // meters
    double heading_threshold{deg_to_rad(15.0)};   // radians
    /// Wall-clock budget charged per step for the particle filter; models the
    /// localization compute cost that slows the hybrid stack down.
    double amcl_step_cost_s{0.25};
    /// Whether the injected odometry fault also feeds the filter's motion
    /// input (the fault models a scan-matcher glitch downstream of the
    /// filter's odometry tap by default).
    bool fault_affects_amcl{false};
    /// The controller declares its mission complete once the believed goal
    /// distance stays under this fraction of the goal radius for a full
    /// check cycle. Well inside the radius, so centimeter-level odometry
    /// error at the goal ring cannot fake an arrival.
    double believed_goal_fraction{0.5};

    void validate() const;
};

/// Position and wrapped-heading separation between two pose estimates.
std::pair<double, double> pose_divergence(const Pose2D& odom, const Pose2D& amcl);

enum class EndReason {
    TrueGoal,        // robot truly inside the goal radius
    Collision,       // geometric contact
    StepBudget,      // max_steps exhausted
    BelievedGoal,    // controller believed it arrived and held there
    LocalizationAbort
};

struct HybridStepRecord {
    std::int64_t step{0};
    Pose2D true_pose;
    Pose2D believed_pose;
    Pose2D amcl_mean;
    double amcl_cov_trace{0.0};
    double v_cmd{0.0};
    double w_cmd{0.0};
    double reward{0.0};
    double true_goal_distance{0.0};
    bool collision{false};
    bool reinit{false};
    bool recovery{false};  // the filter injected recovery particles this step
};

struct EpisodeTrace {
    std::vector<HybridStepRecord> steps;
    EndReason end{EndReason::StepBudget};
    Vec2 goal;
    double goal_radius{0.3};
    double dt{0.1};
    double path_length{0.0};
    double elapsed_s{0.0};  // steps * dt plus the localization compute budget
    int reinit_events{0};
    int recovery_events{0};
};

struct EpisodeOutcome {
    enum class Kind { Success, Collision, Lost };

    Kind kind{Kind::Lost};
    int steps{0};
    double path_length{0.0};
    double elapsed_s{0.0};

    double average_speed() const { return elapsed_s > 0.0 ? path_length / elapsed_s : 0.0; }
};

const char* to_string(EpisodeOutcome::Kind kind);

/// Maps a finished trace onto the success/collision/lost taxonomy: success
/// iff the true goal distance dropped below the radius at any step,
/// collision iff geometric contact fired first, lost otherwise (budget
/// exhausted, believed-goal deadlock or localization abort).
EpisodeOutcome classify_episode(const EpisodeTrace& trace);

/// Drives episodes with the frozen policy on the believed pose: per tick it
/// scans, estimates the odometry delta by scan matching (with optional fault
/// injection), keeps the particle filter updated in hybrid mode, and every
/// check_interval steps reinitializes the believed pose from the filter when
/// the two estimates diverge past the thresholds.
class HybridController {
public:
    HybridController(Scenario scenario, RewardParams reward, HybridConfig config,
                     AmclParams amcl_params, LidarConfig full_scan, std::size_t particle_count);

    EpisodeTrace run_episode(AnyAgent& agent, Rng& rng, bool randomize_start_goal,
                             const FaultConfig& fault);

    /// Routes a breach target (robot frame) into a world-frame navigation
    /// goal using the believed pose; returns false (no-op) when the report
    /// carries no target.
    bool set_target(const BreachReport& breach);
    void set_target(const Vec2& world_goal) { goal_ = world_goal; }
    const Vec2& goal() const { return goal_; }
    const Pose2D& believed_pose() const { return believed_; }

private:
    Scenario scenario_;
    RewardParams reward_;
    HybridConfig config_;
    AmclParams amcl_params_;
    LidarConfig full_scan_;
    std::size_t particle_count_;
    DistanceField distance_field_;

    RobotState robot_;
    std::vector<PedestrianAgent> pedestrians_;
    Pose2D believed_;
    Vec2 goal_;
};

}  // namespace covy
