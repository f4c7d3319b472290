#pragma once

#include <vector>

#include "covy/world.hpp"

namespace covy {

/// Nearest-obstacle distance grid (meters) built from an occupancy raster
/// with an exact Euclidean distance transform. Immutable after construction
/// and shareable across threads.
class DistanceField {
public:
    explicit DistanceField(const OccupancyGrid& grid);

    /// Distance at a world point; lookups outside the grid return a large
    /// sentinel so off-map scan endpoints score as misses.
    double at(const Vec2& p) const;

    double at_cell(int ix, int iy) const {
        return values_[static_cast<std::size_t>(iy) * width_ + ix];
    }
    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }

    static constexpr double kOutside = 1e3;

private:
    int width_{0};
    int height_{0};
    double resolution_{0.05};
    double origin_x_{0.0};
    double origin_y_{0.0};
    std::vector<double> values_;
};

}  // namespace covy
