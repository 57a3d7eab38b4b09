#pragma once

// Reference implementations used only by tests. They deliberately take a
// different route from the library code they check.

#include "lqca/merge.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <vector>

namespace lqca::testing {

/// Max over all simple paths of the product of edge weights, by exhaustive DFS.
/// Returns a dense matrix over node ids [0, n).
inline std::vector<std::vector<double>> brute_force_max_product(std::size_t n, const merge::DirectMap& direct) {
    std::vector<std::vector<double>> w(n, std::vector<double>(n, -1.0));
    for (const auto& [pair, d] : direct) {
        w[pair.a][pair.b] = d;
        w[pair.b][pair.a] = d;
    }
    std::vector<std::vector<double>> best(n, std::vector<double>(n, 0.0));
    std::vector<bool> on_path(n, false);
    std::function<void(std::size_t, std::size_t, double)> dfs = [&](std::size_t src, std::size_t u, double prod) {
        best[src][u] = std::max(best[src][u], prod);
        on_path[u] = true;
        for (std::size_t v = 0; v < n; ++v) {
            if (!on_path[v] && w[u][v] >= 0.0) {
                dfs(src, v, prod * w[u][v]);
            }
        }
        on_path[u] = false;
    };
    for (std::size_t s = 0; s < n; ++s) {
        dfs(s, s, 1.0);
    }
    return best;
}

/// Connected components by breadth-first flood fill, as sorted member sets.
inline std::set<std::vector<std::size_t>> bfs_components(std::size_t n, const std::vector<merge::MentionPair>& edges) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<bool> seen(n, false);
    std::set<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) {
            continue;
        }
        std::vector<std::size_t> comp;
        std::queue<std::size_t> q;
        q.push(s);
        seen[s] = true;
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            comp.push_back(u);
            for (auto v : adj[u]) {
                if (!seen[v]) {
                    seen[v] = true;
                    q.push(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.insert(comp);
    }
    return out;
}

/// Random direct-distance map over n nodes with weights in (0, 1].
template <typename Rng>
merge::DirectMap random_direct_map(Rng& rng, std::size_t n, double edge_probability) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    merge::DirectMap direct;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (coin(rng) < edge_probability) {
                // (0, 1]: 1 - [0, 1)
                direct[{a, b}] = 1.0 - coin(rng);
            }
        }
    }
    return direct;
}

} // namespace lqca::testing
