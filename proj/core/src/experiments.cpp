#include "covy/experiments.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace covy {

std::optional<double> ConfusionMatrix::accuracy() const {
    const long n = total();
    if (n == 0) return std::nullopt;
    return static_cast<double>(tp + tn) / static_cast<double>(n);
}

std::optional<double> ConfusionMatrix::precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> ConfusionMatrix::recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

AleTable run_localization_sweep(const DetectorProfile& profile, const SweepConfig& config,
                                std::uint64_t seed) {
    profile.validate();
    if (config.samples_per_station < 1)
        throw std::invalid_argument("sweep: samples_per_station must be >= 1");

    // Private empty corridor, long enough for any station.
    const double far = config.station_step * config.max_stations + 4.0;
    WorldMap map;
    map.bounds = {0.0, 0.0, far, 8.0};
    const Pose2D sensor{1.0, 4.0, 0.0};

    AleTable table;
    for (int station = 1; station <= config.max_stations; ++station) {
        const double d = station * config.station_step;
        PedestrianAgent ped;
        ped.id = 1;
        ped.position = {sensor.x + d, sensor.y};

        Rng rng(derive_seed(seed, 0xA1E0000 + station));
        double sum = 0.0, sum_sq = 0.0;
        int detections = 0;
        for (int s = 0; s < config.samples_per_station; ++s) {
            const auto obs = emulate_detections(map, {ped}, sensor, profile, rng, s);
            if (obs.empty()) continue;
            const double err = (obs.front().position_robot_frame - Vec2{d, 0.0}).norm();
            sum += err;
            sum_sq += err * err;
            ++detections;
        }
        if (detections == 0) break;  // sensor ran out of range

        AleRow row;
        row.distance = d;
        row.samples = detections;
        row.mean_ale = sum / detections;
        if (detections > 1) {
            const double var =
                std::max(0.0, (sum_sq - sum * sum / detections) / (detections - 1));
            row.ci_half_width = config.ci_z * std::sqrt(var / detections);
        }
        table.rows.push_back(row);
    }
    return table;
}

namespace {

struct BreachScene {
    PedestrianAgent a;
    PedestrianAgent b;
    bool truth{false};
};

/// Samples one two-pedestrian scene with the requested label, both agents
/// inside the stage's usable range and field of view.
BreachScene sample_scene(const DetectorProfile& profile, const BreachEvalConfig& cfg,
                         const Pose2D& sensor, const Bounds& bounds, bool positive, Rng& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double sep = positive ? rng.uniform(cfg.min_pair_sep, cfg.threshold - 0.05)
                                    : rng.uniform(cfg.threshold + 0.05, cfg.max_pair_sep);
        const double usable = profile.max_range - cfg.range_margin;
        if (usable <= 1.0) throw std::invalid_argument("breach eval: range too small");
        const double d_center = rng.uniform(1.0, usable);
        const double bearing =
            rng.uniform(-profile.fov / 2.0 * cfg.fov_margin, profile.fov / 2.0 * cfg.fov_margin);
        const double axis = rng.uniform(-kPi, kPi);

        const Vec2 center{sensor.x + d_center * std::cos(sensor.theta + bearing),
                          sensor.y + d_center * std::sin(sensor.theta + bearing)};
        const Vec2 offset{0.5 * sep * std::cos(axis), 0.5 * sep * std::sin(axis)};
        const Vec2 p1 = center + offset;
        const Vec2 p2 = center - offset;

        const auto visible = [&](const Vec2& p) {
            const Vec2 local = sensor.inverse_transform(p);
            const double dist = local.norm();
            if (dist < 0.5 || dist > usable) return false;
            if (std::fabs(std::atan2(local.y, local.x)) > profile.fov / 2.0 * cfg.fov_margin)
                return false;
            return bounds.contains(p);
        };
        if (!visible(p1) || !visible(p2)) continue;

        BreachScene scene;
        scene.a.id = 1;
        scene.a.position = p1;
        scene.b.id = 2;
        scene.b.position = p2;
        scene.truth = distance(p1, p2) < cfg.threshold;  // strict rule
        if (scene.truth != positive) continue;           // guard the boundary
        return scene;
    }
    throw std::runtime_error("breach eval: could not sample a valid scene");
}

}  // namespace

std::vector<BreachEvalResult> run_breach_eval(
    const DetectorProfile& rgbd, const DetectorProfile& rgb, const TrackerParams& tracker,
    const BreachEvalConfig& config, std::uint64_t seed,
    const std::function<void(const VisionFrame&, bool)>& on_scene) {
    if (config.scenes < 1) throw std::invalid_argument("breach eval: scenes must be >= 1");
    if (config.warm_frames < config.window)
        throw std::invalid_argument("breach eval: warm_frames must cover the window");

    WorldMap map;
    map.bounds = {0.0, 0.0, 44.0, 44.0};
    const Pose2D sensor{2.0, 22.0, 0.0};

    std::vector<BreachEvalResult> results;
    const DetectorProfile* profiles[2] = {&rgbd, &rgb};
    for (int m = 0; m < 2; ++m) {
        const DetectorProfile& profile = *profiles[m];
        BreachEvalResult result;
        result.mode = profile.mode;

        TrackerParams tp = tracker;
        tp.history_window = config.window;
        for (int scene_idx = 0; scene_idx < config.scenes; ++scene_idx) {
            const bool positive = scene_idx % 2 == 0;  // balanced by construction
            Rng rng(derive_seed(seed, 0xB0000 + m * 100000 + scene_idx));
            const BreachScene scene =
                sample_scene(profile, config, sensor, map.bounds, positive, rng);

            VisionPipeline pipeline(profile, profile, tp, config.threshold, config.window,
                                    m == 0 ? PipelineMode::RgbdOnly : PipelineMode::RgbOnly);
            VisionFrame frame;
            for (int f = 0; f < config.warm_frames; ++f) {
                frame = pipeline.step(map, {scene.a, scene.b}, sensor, rng);
            }
            if (on_scene) on_scene(frame, scene.truth);
            const bool predicted = frame.report.any_breach();
            if (scene.truth && predicted) ++result.matrix.tp;
            if (scene.truth && !predicted) ++result.matrix.fn;
            if (!scene.truth && predicted) ++result.matrix.fp;
            if (!scene.truth && !predicted) ++result.matrix.tn;
        }
        results.push_back(result);
    }
    return results;
}

double NavStats::failure_pct() const {
    return episodes ? 100.0 * static_cast<double>(collisions + lost) / episodes : 0.0;
}

double NavStats::collision_pct() const {
    return episodes ? 100.0 * static_cast<double>(collisions) / episodes : 0.0;
}

double NavStats::lost_pct() const {
    return episodes ? 100.0 * static_cast<double>(lost) / episodes : 0.0;
}

NavStats run_nav_eval(const Scenario& scenario, AnyAgent& agent, const Config& config,
                      HybridConfig::Mode mode, int episodes, std::uint64_t seed,
                      const FaultConfig& fault, bool randomize_start_goal) {
    if (episodes < 1) throw std::invalid_argument("nav eval: episodes must be >= 1");

    HybridConfig hybrid = config.hybrid;
    hybrid.mode = mode;
    HybridController controller(scenario, config.reward, hybrid, config.amcl, config.full_lidar,
                                config.amcl_particles);

    NavStats stats;
    stats.episodes = episodes;
    double speed_sum = 0.0;
    for (int e = 0; e < episodes; ++e) {
        Rng rng(derive_seed(seed, 0xE9000 + e));
        const EpisodeTrace trace =
            controller.run_episode(agent, rng, randomize_start_goal, fault);
        const EpisodeOutcome outcome = classify_episode(trace);

        NavEpisodeRecord rec;
        rec.episode = e;
        rec.outcome = outcome;
        rec.reinit_events = trace.reinit_events;
        rec.end = trace.end;
        stats.records.push_back(rec);
        speed_sum += outcome.average_speed();

        switch (outcome.kind) {
            case EpisodeOutcome::Kind::Success: ++stats.successes; break;
            case EpisodeOutcome::Kind::Collision: ++stats.collisions; break;
            case EpisodeOutcome::Kind::Lost: ++stats.lost; break;
        }
    }
    stats.average_speed = speed_sum / episodes;
    return stats;
}

std::vector<CurvePoint> smooth_returns(const TrainingLog& log, int window) {
    if (window < 1) throw std::invalid_argument("smooth_returns: window must be >= 1");
    std::vector<CurvePoint> points;
    const int blocks = static_cast<int>(log.episodes.size()) / window;
    for (int b = 0; b < blocks; ++b) {
        double sum = 0.0;
        for (int i = 0; i < window; ++i) sum += log.episodes[b * window + i].episode_return;
        points.push_back({(b + 1) * window, sum / window});
    }
    return points;
}

}  // namespace covy
