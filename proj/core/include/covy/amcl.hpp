#pragma once

#include <array>
#include <vector>

#include "covy/distance_field.hpp"
#include "covy/scan_match.hpp"
#include "covy/world.hpp"

namespace covy {

struct Particle {
    Pose2D pose;
    double weight{0.0};
};

/// Weighted pose hypotheses plus the augmented-MCL recovery accumulators.
struct ParticleSet {
    std::vector<Particle> particles;
    double w_slow{0.0};
    double w_fast{0.0};
    std::int64_t updates{0};   // measurement updates since initialization
    bool global_init{false};   // started from the uniform prior

    std::size_t count() const { return particles.size(); }
};

struct AmclParams {
    // Odometry motion model noise (rot1/trans/rot2 decomposition).
    double alpha1{0.2};
    double alpha2{0.2};
    double alpha3{0.2};
    double alpha4{0.2};
    // Likelihood-field measurement model.
    double z_hit{0.9};
    double z_rand{0.1};
    double sigma_hit{0.2};
    int beams_used{30};
    // Augmented recovery decay rates.
    double alpha_slow{0.001};
    double alpha_fast{0.1};
    // Adaptive likelihood tempering: log-weights are scaled by the largest
    // exponent in (0, 1] that keeps the effective sample size above this
    // fraction of the particle count. Keeps global localization from
    // collapsing onto one hypothesis after a single update; once the filter
    // has concentrated the exponent sits at 1 and the model is untouched.
    double ess_floor_fraction{0.45};
    // Uniform-restart exploration floor for the first explore_updates
    // measurement updates after (re)initialization: at least this fraction
    // of resampled particles come from the uniform prior. The augmented
    // w_slow/w_fast test cannot trigger during global initialization (the
    // average likelihood rises, never drops), so early exploration carries
    // that burden instead.
    double explore_inject{0.3};
    int explore_updates{26};
};

/// Uniformly distributed particles over the free space of the map.
ParticleSet init_particles_uniform(const WorldMap& map, std::size_t count, Rng& rng);

/// Particles drawn around a known start pose (tracking initialization).
ParticleSet init_particles_gaussian(const Pose2D& mean, double sigma_xy, double sigma_theta,
                                    std::size_t count, Rng& rng);

struct AmclUpdateResult {
    bool recovery_injected{false};  // at least one random particle this update
    bool reinitialized{false};      // total weight underflowed to zero
};

/// One augmented-MCL cycle: sample the motion model with the odometry delta,
/// weight with the likelihood field over a decimated beam subset, normalize,
/// update w_slow/w_fast, and low-variance resample with random-pose injection
/// at rate max(0, 1 - w_fast/w_slow).
AmclUpdateResult amcl_update(ParticleSet& ps, const PoseDelta& odom_delta, const LidarScan& scan,
                             const WorldMap& map, const DistanceField& df,
                             const AmclParams& params, Rng& rng);

/// Weighted mean pose (circular mean for theta) and 3x3 sample covariance
/// with angular deviations wrapped.
std::pair<Pose2D, std::array<std::array<double, 3>, 3>> estimate_pose(const ParticleSet& ps);

}  // namespace covy
