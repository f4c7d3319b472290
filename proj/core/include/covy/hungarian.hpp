#pragma once

#include <utility>
#include <vector>

namespace covy {

/// Rectangular cost matrix, row-major.
struct CostMatrix {
    int rows{0};
    int cols{0};
    std::vector<double> cost;

    double at(int r, int c) const { return cost[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return cost[static_cast<std::size_t>(r) * cols + c]; }
};

/// Minimum-cost assignment of min(rows, cols) pairs via the Hungarian
/// algorithm with potentials, O(n^2 m). Costs must be finite. The scan order
/// is fixed, so ties resolve deterministically; pairs come back sorted by
/// (row, col). An empty matrix yields an empty assignment.
std::vector<std::pair<int, int>> hungarian_assign(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, const std::vector<std::pair<int, int>>& pairs);

}  // namespace covy
