#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "covy/world.hpp"

namespace covy {

/// Incremental rigid motion expressed in the previous pose's frame.
struct PoseDelta {
    double dx{0.0};
    double dy{0.0};
    double dtheta{0.0};

    friend bool operator==(const PoseDelta&, const PoseDelta&) = default;
};

/// Composes two deltas: applying `first` then `second`.
PoseDelta compose(const PoseDelta& first, const PoseDelta& second);

/// Applies a frame-local delta to a world pose; theta is renormalized.
Pose2D integrate_odometry(const Pose2D& pose, const PoseDelta& delta);

struct ScanMatchParams {
    int max_iter{30};
    double tol{1e-6};
    double correspondence_limit{0.5};  // pairs farther than this are dropped
    double trim_fraction{0.1};         // worst residuals discarded per iteration
};

struct DegenerateScanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// ICP between consecutive scans. Matches the current scan's points (polar
/// to Cartesian, max-range beams dropped) against the previous scan's local
/// surface (nearest point, refined by projection onto its adjacent beam
/// segments) and solves the closed-form 2D rigid alignment each iteration.
/// Returns the transform mapping the current frame into the previous frame,
/// i.e. the robot's motion over the interval. Throws DegenerateScanError
/// when either scan has fewer than 3 valid points.
PoseDelta scan_match(const LidarScan& prev, const LidarScan& cur,
                     const PoseDelta& init = {}, const ScanMatchParams& params = {});

/// Deterministic odometry fault: a constant per-step bias plus a single jump
/// fired exactly at trigger_step.
struct FaultConfig {
    bool enabled{false};
    std::int64_t trigger_step{-1};
    PoseDelta jump;
    PoseDelta per_step_bias;
};

PoseDelta inject_fault(const PoseDelta& delta, const FaultConfig& cfg, std::int64_t step);

}  // namespace covy
