#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "covy/config.hpp"
#include "covy/hybrid.hpp"
#include "covy/pipeline.hpp"
#include "covy/scenario.hpp"
#include "covy/training.hpp"

namespace covy {

/// Binary-classification counts; derived rates stay undefined (nullopt)
/// whenever their denominator is zero.
struct ConfusionMatrix {
    long tp{0};
    long fp{0};
    long tn{0};
    long fn{0};

    long total() const { return tp + fp + tn + fn; }
    std::optional<double> accuracy() const;
    std::optional<double> precision() const;
    std::optional<double> recall() const;
};

struct AleRow {
    double distance{0.0};
    double mean_ale{0.0};
    double ci_half_width{0.0};
    int samples{0};
};

struct AleTable {
    std::vector<AleRow> rows;
};

struct SweepConfig {
    double station_step{1.0};
    int samples_per_station{50};
    double ci_z{1.959964};  // normal 95%
    int max_stations{40};
};

/// Walks a pedestrian away from the sensor in 1 m stations, draws the
/// configured number of detections per station and records the mean radial
/// error with its confidence half-width. Stops at the first station with
/// zero detections.
AleTable run_localization_sweep(const DetectorProfile& profile, const SweepConfig& config,
                                std::uint64_t seed);

struct BreachEvalConfig {
    int scenes{200};
    double threshold{1.5};
    int window{20};
    int warm_frames{25};       // frames run per scene, >= window
    double min_pair_sep{0.4};  // meters between the two pedestrians
    double max_pair_sep{3.0};
    double range_margin{0.5};  // keep pairs this far inside max_range
    double fov_margin{0.9};    // fraction of the half-FOV usable
};

struct BreachEvalResult {
    SensorMode mode{SensorMode::RGBD};
    ConfusionMatrix matrix;
};

/// Balanced two-pedestrian scenes pushed through the full pipeline
/// (emulate, track over the averaging window, classify); scene truth is the
/// strict 1.5 m rule on true positions. `on_scene`, when set, receives each
/// scene's final frame plus its ground-truth label (detection-log export).
std::vector<BreachEvalResult> run_breach_eval(
    const DetectorProfile& rgbd, const DetectorProfile& rgb, const TrackerParams& tracker,
    const BreachEvalConfig& config, std::uint64_t seed,
    const std::function<void(const VisionFrame&, bool)>& on_scene = {});

struct NavEpisodeRecord {
    int episode{0};
    EpisodeOutcome outcome;
    int reinit_events{0};
    EndReason end{EndReason::StepBudget};
};

struct NavStats {
    int episodes{0};
    int successes{0};
    int collisions{0};
    int lost{0};
    double average_speed{0.0};  // mean of per-episode path/elapsed
    std::vector<NavEpisodeRecord> records;

    double failure_pct() const;
    double collision_pct() const;
    double lost_pct() const;
    double success_pct() const { return 100.0 - failure_pct(); }
};

/// Seeded hybrid-nav evaluation episodes with optional fault injection.
NavStats run_nav_eval(const Scenario& scenario, AnyAgent& agent, const Config& config,
                      HybridConfig::Mode mode, int episodes, std::uint64_t seed,
                      const FaultConfig& fault, bool randomize_start_goal = true);

struct CurvePoint {
    int episode_end{0};     // last episode of the block (exclusive)
    double mean_return{0.0};
};

/// Non-overlapping block means of the per-episode returns; only complete
/// blocks produce points.
std::vector<CurvePoint> smooth_returns(const TrainingLog& log, int window);

}  // namespace covy
