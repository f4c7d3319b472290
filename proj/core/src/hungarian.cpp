#include "covy/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace covy {

namespace {

/// Classic potentials formulation; requires n <= m. Returns, for each row
/// 0..n-1, the column assigned to it.
std::vector<int> solve(const CostMatrix& a, int n, int m, bool transposed) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);

    const auto cost = [&](int i, int j) {
        // 1-based indices into the 0-based matrix, optionally transposed.
        return transposed ? a.at(j - 1, i - 1) : a.at(i - 1, j - 1);
    };

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian_assign(const CostMatrix& cost) {
    if (cost.rows == 0 || cost.cols == 0) return {};
    if (static_cast<std::size_t>(cost.rows) * cost.cols != cost.cost.size())
        throw std::invalid_argument("hungarian_assign: matrix size mismatch");
    for (double c : cost.cost) {
        if (!std::isfinite(c)) throw std::invalid_argument("hungarian_assign: non-finite cost");
    }

    std::vector<std::pair<int, int>> pairs;
    if (cost.rows <= cost.cols) {
        const auto row_to_col = solve(cost, cost.rows, cost.cols, false);
        for (int r = 0; r < cost.rows; ++r) pairs.emplace_back(r, row_to_col[r]);
    } else {
        const auto col_to_row = solve(cost, cost.cols, cost.rows, true);
        for (int c = 0; c < cost.cols; ++c) pairs.emplace_back(col_to_row[c], c);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

double assignment_cost(const CostMatrix& cost, const std::vector<std::pair<int, int>>& pairs) {
    double total = 0.0;
    for (const auto& [r, c] : pairs) total += cost.at(r, c);
    return total;
}

}  // namespace covy
