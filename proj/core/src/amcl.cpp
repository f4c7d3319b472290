#include "covy/amcl.hpp"

#include <cmath>
#include <stdexcept>

namespace covy {

namespace {

Pose2D random_free_pose(const WorldMap& map, Rng& rng) {
    // Rejection-sample outside obstacles; bounded retries keep this total.
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Vec2 p{rng.uniform(map.bounds.min_x, map.bounds.max_x),
               rng.uniform(map.bounds.min_y, map.bounds.max_y)};
        if (map.inside_obstacle(p)) continue;
        return {p.x, p.y, rng.uniform(-kPi, kPi)};
    }
    return {0.5 * (map.bounds.min_x + map.bounds.max_x),
            0.5 * (map.bounds.min_y + map.bounds.max_y), 0.0};
}

/// Thrun-style odometry motion model sample. For near-zero translations the
/// rot1/trans/rot2 decomposition is degenerate (atan2 of jitter), so the
/// whole rotation goes into rot2.
Pose2D sample_motion(const Pose2D& pose, const PoseDelta& delta, const AmclParams& p, Rng& rng) {
    const double trans = std::hypot(delta.dx, delta.dy);
    double rot1 = trans > 0.01 ? std::atan2(delta.dy, delta.dx) : 0.0;
    double rot2 = wrap_angle(delta.dtheta - rot1);

    const double var1 = p.alpha1 * rot1 * rot1 + p.alpha2 * trans * trans;
    const double var_t = p.alpha3 * trans * trans + p.alpha4 * (rot1 * rot1 + rot2 * rot2);
    const double var2 = p.alpha1 * rot2 * rot2 + p.alpha2 * trans * trans;

    const double r1 = rot1 + rng.normal(0.0, std::sqrt(var1));
    const double tr = trans + rng.normal(0.0, std::sqrt(var_t));
    const double r2 = rot2 + rng.normal(0.0, std::sqrt(var2));

    Pose2D out;
    out.x = pose.x + tr * std::cos(pose.theta + r1);
    out.y = pose.y + tr * std::sin(pose.theta + r1);
    out.theta = wrap_angle(pose.theta + r1 + r2);
    return out;
}

/// Likelihood-field score of a scan from a hypothetical pose.
double measurement_likelihood(const Pose2D& pose, const LidarScan& scan, const DistanceField& df,
                              const AmclParams& p) {
    const int stride = std::max(1, scan.beam_count / std::max(1, p.beams_used));
    const double inv_two_sigma2 = 1.0 / (2.0 * p.sigma_hit * p.sigma_hit);

    double log_w = 0.0;
    for (int i = 0; i < scan.beam_count; i += stride) {
        const double r = scan.ranges[i];
        if (r >= scan.max_range - 1e-9) continue;  // max-range readings carry no endpoint
        const double a = pose.theta + scan.beam_angle(i);
        const Vec2 end{pose.x + r * std::cos(a), pose.y + r * std::sin(a)};
        const double d = df.at(end);
        const double prob = p.z_hit * std::exp(-d * d * inv_two_sigma2) + p.z_rand;
        log_w += std::log(prob);
    }
    return log_w;
}

}  // namespace

ParticleSet init_particles_uniform(const WorldMap& map, std::size_t count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("init_particles_uniform: count must be >= 1");
    ParticleSet ps;
    ps.global_init = true;
    ps.particles.resize(count);
    const double w = 1.0 / static_cast<double>(count);
    for (Particle& particle : ps.particles) {
        particle.pose = random_free_pose(map, rng);
        particle.weight = w;
    }
    return ps;
}

ParticleSet init_particles_gaussian(const Pose2D& mean, double sigma_xy, double sigma_theta,
                                    std::size_t count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("init_particles_gaussian: count must be >= 1");
    ParticleSet ps;
    ps.particles.resize(count);
    const double w = 1.0 / static_cast<double>(count);
    for (Particle& particle : ps.particles) {
        particle.pose.x = mean.x + rng.normal(0.0, sigma_xy);
        particle.pose.y = mean.y + rng.normal(0.0, sigma_xy);
        particle.pose.theta = wrap_angle(mean.theta + rng.normal(0.0, sigma_theta));
        particle.weight = w;
    }
    return ps;
}

AmclUpdateResult amcl_update(ParticleSet& ps, const PoseDelta& odom_delta, const LidarScan& scan,
                             const WorldMap& map, const DistanceField& df,
                             const AmclParams& params, Rng& rng) {
    if (ps.particles.empty()) throw std::invalid_argument("amcl_update: empty particle set");
    AmclUpdateResult result;
    const std::size_t n = ps.particles.size();

    // 1) Motion.
    for (Particle& particle : ps.particles) {
        particle.pose = sample_motion(particle.pose, odom_delta, params, rng);
    }

    // 2) Measurement weights, computed in log space to dodge underflow.
    std::vector<double> log_w(n);
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        log_w[i] = measurement_likelihood(ps.particles[i].pose, scan, df, params);
        max_log = std::max(max_log, log_w[i]);
    }

    double likelihood_sum = 0.0;  // un-shifted average likelihood for w_slow/w_fast
    for (std::size_t i = 0; i < n; ++i) likelihood_sum += std::exp(log_w[i]);

    // Pick the sharpest tempering exponent that keeps ESS above the floor.
    const auto weigh = [&](double beta, std::vector<double>& out) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = std::isfinite(max_log)
                                 ? ps.particles[i].weight * std::exp(beta * (log_w[i] - max_log))
                                 : 0.0;
            out[i] = w;
            total += w;
        }
        return total;
    };
    const auto ess_of = [&](const std::vector<double>& w, double total) {
        if (!(total > 0.0)) return 0.0;
        double sq = 0.0;
        for (double v : w) sq += (v / total) * (v / total);
        return 1.0 / sq;
    };

    // Tempering and uniform exploration only run while a globally
    // initialized filter is still searching; tracking-mode updates use the
    // plain likelihood.
    const bool exploring = ps.global_init && ps.updates < params.explore_updates;

    std::vector<double> weights(n);
    double sum = weigh(1.0, weights);
    const double ess_floor =
        exploring ? params.ess_floor_fraction * static_cast<double>(n) : 0.0;
    if (ess_floor > 1.0 && ess_of(weights, sum) < ess_floor) {
        double lo = 0.0, hi = 1.0;  // ESS(0) = n >= floor
        for (int iter = 0; iter < 30; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double total = weigh(mid, weights);
            (ess_of(weights, total) >= ess_floor ? lo : hi) = mid;
        }
        sum = weigh(lo, weights);
    }
    for (std::size_t i = 0; i < n; ++i) ps.particles[i].weight = weights[i];

    if (!(sum > 0.0) || !std::isfinite(sum)) {
        // Total underflow: start over from a uniform prior.
        ps = init_particles_uniform(map, n, rng);
        ps.w_slow = ps.w_fast = 0.0;
        result.reinitialized = true;
        result.recovery_injected = true;
        return result;
    }

    // 3) Normalize and update the recovery accumulators.
    for (Particle& particle : ps.particles) particle.weight /= sum;
    const double w_avg = likelihood_sum / static_cast<double>(n);
    if (ps.w_slow == 0.0) ps.w_slow = w_avg;
    if (ps.w_fast == 0.0) ps.w_fast = w_avg;
    ps.w_slow += params.alpha_slow * (w_avg - ps.w_slow);
    ps.w_fast += params.alpha_fast * (w_avg - ps.w_fast);
    ps.updates += 1;
    double p_inject = ps.w_slow > 0.0 ? std::max(0.0, 1.0 - ps.w_fast / ps.w_slow) : 0.0;
    if (exploring) {
        p_inject = std::max(p_inject, params.explore_inject);
    }

    // 4) Low-variance resampling with augmented random-pose injection.
    // Resampling only when the effective sample size halves keeps hypothesis
    // diversity alive during global localization.
    double ess_inv = 0.0;
    for (const Particle& particle : ps.particles) ess_inv += particle.weight * particle.weight;
    const double ess = 1.0 / ess_inv;
    if (ess > 0.5 * static_cast<double>(n) && p_inject <= 0.0) return result;

    std::vector<Particle> next;
    next.reserve(n);
    const double step = 1.0 / static_cast<double>(n);
    double cursor = rng.uniform() * step;
    double cumulative = ps.particles[0].weight;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = cursor + static_cast<double>(i) * step;
        while (cumulative < target && idx + 1 < n) {
            ++idx;
            cumulative += ps.particles[idx].weight;
        }
        Particle p;
        if (p_inject > 0.0 && rng.uniform() < p_inject) {
            p.pose = random_free_pose(map, rng);
            result.recovery_injected = true;
        } else {
            p.pose = ps.particles[idx].pose;
        }
        p.weight = step;
        next.push_back(p);
    }
    ps.particles = std::move(next);
    return result;
}

std::pair<Pose2D, std::array<std::array<double, 3>, 3>> estimate_pose(const ParticleSet& ps) {
    if (ps.particles.empty()) throw std::invalid_argument("estimate_pose: empty particle set");
    double wsum = 0.0, mx = 0.0, my = 0.0, sc = 0.0, ss = 0.0;
    for (const Particle& p : ps.particles) {
        wsum += p.weight;
        mx += p.weight * p.pose.x;
        my += p.weight * p.pose.y;
        sc += p.weight * std::cos(p.pose.theta);
        ss += p.weight * std::sin(p.pose.theta);
    }
    if (!(wsum > 0.0)) throw std::invalid_argument("estimate_pose: zero total weight");
    mx /= wsum;
    my /= wsum;
    const double mtheta = std::atan2(ss, sc);

    std::array<std::array<double, 3>, 3> cov{};
    for (const Particle& p : ps.particles) {
        const double w = p.weight / wsum;
        const double d[3] = {p.pose.x - mx, p.pose.y - my, wrap_angle(p.pose.theta - mtheta)};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) cov[r][c] += w * d[r] * d[c];
        }
    }
    return {Pose2D{mx, my, wrap_angle(mtheta)}, cov};
}

}  // namespace covy
