#include "covy/breach.hpp"

#include <algorithm>
#include <stdexcept>

namespace covy {

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

BreachReport detect_breaches(const std::vector<Track>& tracks, double threshold, int window,
                             std::int64_t frame) {
    if (!(threshold > 0.0)) throw std::invalid_argument("detect_breaches: threshold must be > 0");
    if (window < 1) throw std::invalid_argument("detect_breaches: window must be >= 1");

    BreachReport report;
    report.frame = frame;

    std::vector<int> ids;
    std::vector<Vec2> means;
    for (const Track& t : tracks) {
        if (static_cast<int>(t.position_history.size()) < window) continue;
        Vec2 mean{0.0, 0.0};
        auto it = t.position_history.end();
        for (int k = 0; k < window; ++k) {
            --it;
            mean += *it;
        }
        mean = mean * (1.0 / window);
        report.averaged_positions[t.id] = mean;
        ids.push_back(t.id);
        means.push_back(mean);
    }

    const std::size_t n = ids.size();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (distance(means[i], means[j]) < threshold) {
                const auto [lo, hi] = std::minmax(ids[i], ids[j]);
                report.breach_pairs.emplace(lo, hi);
                uf.unite(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }

    // Only ids that appear in some breach pair form groups.
    std::map<int, std::set<int>> components;  // root index -> member ids
    for (std::size_t i = 0; i < n; ++i) {
        bool in_pair = false;
        for (const auto& [a, b] : report.breach_pairs) {
            if (a == ids[i] || b == ids[i]) {
                in_pair = true;
                break;
            }
        }
        if (in_pair) components[uf.find(static_cast<int>(i))].insert(ids[i]);
    }
    for (auto& [root, members] : components) report.groups.push_back(members);
    std::sort(report.groups.begin(), report.groups.end(),
              [](const std::set<int>& a, const std::set<int>& b) { return *a.begin() < *b.begin(); });

    if (!report.groups.empty()) {
        const std::set<int>* largest = &report.groups.front();
        for (const std::set<int>& g : report.groups) {
            // Ties break toward the group with the lowest member id; groups
            // are ordered by lowest id already, so strict > keeps the first.
            if (g.size() > largest->size()) largest = &g;
        }
        Vec2 centroid{0.0, 0.0};
        for (int id : *largest) centroid += report.averaged_positions.at(id);
        report.target = centroid * (1.0 / static_cast<double>(largest->size()));
    }
    return report;
}

}  // namespace covy
