#include "covy/distance_field.hpp"
#include <algorithm>

#include <cmath>
#include <limits>

namespace covy {

namespace {

// Large finite sentinel: the parabola-intersection arithmetic below must not
// see inf - inf.
constexpr double kInf = 1e12;

/// 1D squared distance transform (Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

DistanceField::DistanceField(const OccupancyGrid& grid)
    : width_(grid.width),
      height_(grid.height),
      resolution_(grid.resolution),
      origin_x_(grid.origin_x),
      origin_y_(grid.origin_y) {
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = grid.cells[i] ? 0.0 : kInf;

    // Two 1D passes give exact 2D squared distances.
    {
        std::vector<double> f(height_), d(height_), z(height_ + 1);
        std::vector<int> v(height_);
        for (int x = 0; x < width_; ++x) {
            for (int y = 0; y < height_; ++y) f[y] = sq[static_cast<std::size_t>(y) * width_ + x];
            edt_1d(f, d, v, z);
            for (int y = 0; y < height_; ++y) sq[static_cast<std::size_t>(y) * width_ + x] = d[y];
        }
    }
    {
        std::vector<double> f(width_), d(width_), z(width_ + 1);
        std::vector<int> v(width_);
        for (int y = 0; y < height_; ++y) {
            for (int x = 0; x < width_; ++x) f[x] = sq[static_cast<std::size_t>(y) * width_ + x];
            edt_1d(f, d, v, z);
            for (int x = 0; x < width_; ++x) sq[static_cast<std::size_t>(y) * width_ + x] = d[x];
        }
    }

    values_.resize(n);
    for (std::size_t i = 0; i < n; ++i) values_[i] = std::sqrt(sq[i]) * resolution_;
}

double DistanceField::at(const Vec2& p) const {
    // Points a hair outside the raster (rays hitting the far walls project to
    // exactly the boundary, noise can overshoot it) snap to the border cell;
    // anything past the margin counts as a miss. One cell only: a wider snap
    // zone would let poses slide toward walls without penalty.
    const double margin = 1.0 * resolution_;
    const double gx = (p.x - origin_x_) / resolution_;
    const double gy = (p.y - origin_y_) / resolution_;
    if (gx < -margin / resolution_ || gy < -margin / resolution_ ||
        gx > width_ + margin / resolution_ || gy > height_ + margin / resolution_) {
        return kOutside;
    }
    const int ix = std::clamp(static_cast<int>(std::floor(gx)), 0, width_ - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(gy)), 0, height_ - 1);
    return values_[static_cast<std::size_t>(iy) * width_ + ix];
}

}  // namespace covy
