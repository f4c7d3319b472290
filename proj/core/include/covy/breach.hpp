#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "covy/tracker.hpp"

namespace covy {

/// Social-distancing classification of one frame. Positions are window
/// averages in the robot frame; groups are the connected components of the
/// breach-pair graph.
struct BreachReport {
    std::int64_t frame{0};
    std::map<int, Vec2> averaged_positions;              // track id -> mean position
    std::set<std::pair<int, int>> breach_pairs;          // id pairs, first < second
    std::vector<std::set<int>> groups;
    std::optional<Vec2> target;                          // centroid of the largest group

    bool any_breach() const { return !breach_pairs.empty(); }
};

/// Classifies breaches over tracks with at least `window` history entries.
/// Each participating track contributes the arithmetic mean of its last
/// `window` positions; pairs closer than `threshold` (strict) breach. The
/// target is the centroid of the group with the most members, ties broken by
/// lowest member id.
BreachReport detect_breaches(const std::vector<Track>& tracks, double threshold, int window,
                             std::int64_t frame = 0);

}  // namespace covy
