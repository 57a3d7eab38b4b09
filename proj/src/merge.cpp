#include "lqca/merge.hpp"

#include "lqca/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <thread>

namespace lqca::merge {
namespace {

using Span = std::pair<std::size_t, std::size_t>;

MentionId id_of(std::span<const GlobalMention> mentions, std::size_t start, std::size_t end) {
    auto it = std::lower_bound(mentions.begin(), mentions.end(), Span{start, end},
                               [](const GlobalMention& m, const Span& s) { return Span{m.start, m.end} < s; });
    if (it == mentions.end() || it->start != start || it->end != end) {
        throw IntegrityError("span [" + std::to_string(start) + ", " + std::to_string(end) +
                             ") is not a unified mention");
    }
    return static_cast<MentionId>(it - mentions.begin());
}

struct Adjacency {
    std::vector<MentionId> nodes; // compact index -> mention id
    std::vector<std::vector<std::pair<std::size_t, double>>> edges;
};

Adjacency build_adjacency(const DirectMap& direct) {
    std::set<MentionId> node_set;
    for (const auto& [pair, d] : direct) {
        node_set.insert(pair.a);
        node_set.insert(pair.b);
    }
    Adjacency adj;
    adj.nodes.assign(node_set.begin(), node_set.end());
    adj.edges.resize(adj.nodes.size());
    auto compact = [&](MentionId id) {
        return static_cast<std::size_t>(std::lower_bound(adj.nodes.begin(), adj.nodes.end(), id) - adj.nodes.begin());
    };
    std::size_t clamped = 0;
    for (const auto& [pair, raw] : direct) {
        const double w = std::clamp(raw, 0.0, 1.0);
        if (w != raw) {
            ++clamped;
        }
        if (w <= 0.0) {
            continue;
        }
        const auto a = compact(pair.a);
        const auto b = compact(pair.b);
        adj.edges[a].emplace_back(b, w);
        adj.edges[b].emplace_back(a, w);
    }
    if (clamped > 0) {
        spdlog::warn("clamped {} direct distance(s) into [0, 1]", clamped);
    }
    return adj;
}

// Best path products from `source` to every node with a larger compact index.
void max_product_from(const Adjacency& adj, std::size_t source, std::vector<double>& dist,
                      std::vector<char>& visited, std::vector<std::size_t>& touched,
                      std::vector<std::pair<std::size_t, double>>& out) {
    struct Item {
        double d;
        std::size_t node;
    };
    // Heaviest first; lowest id first among equals.
    auto lighter = [](const Item& x, const Item& y) { return x.d < y.d || (x.d == y.d && x.node > y.node); };
    std::priority_queue<Item, std::vector<Item>, decltype(lighter)> queue(lighter);

    dist[source] = 1.0;
    touched.push_back(source);
    queue.push({1.0, source});
    while (!queue.empty()) {
        const Item top = queue.top();
        queue.pop();
        if (visited[top.node] || top.d < dist[top.node]) {
            continue;
        }
        visited[top.node] = 1;
        for (const auto& [v, w] : adj.edges[top.node]) {
            if (visited[v]) {
                continue;
            }
            const double alt = dist[top.node] * w;
            if (alt > dist[v]) {
                if (dist[v] == 0.0) {
                    touched.push_back(v);
                }
                dist[v] = alt;
                queue.push({alt, v});
            }
        }
    }
    for (std::size_t v : touched) {
        if (v > source && dist[v] > 0.0) {
            out.emplace_back(v, dist[v]);
        }
        dist[v] = 0.0;
        visited[v] = 0;
    }
    touched.clear();
}

} // namespace

std::vector<GlobalMention> unify_mentions(std::span<const resolver::LocalClustering> clusterings,
                                          std::span<const segmenter::Chunk> chunks) {
    std::map<Span, std::set<std::size_t>> found;
    std::map<Span, std::string> surface;
    for (const auto& clustering : clusterings) {
        if (clustering.chunk_index >= chunks.size()) {
            throw IntegrityError("clustering references missing chunk " + std::to_string(clustering.chunk_index));
        }
        const auto& chunk = chunks[clustering.chunk_index];
        const std::size_t length = chunk.end - chunk.start;
        for (const auto& m : clustering.mentions) {
            if (m.start >= m.end || m.end > length) {
                throw IntegrityError("chunk " + std::to_string(clustering.chunk_index) + ": mention [" +
                                     std::to_string(m.start) + ", " + std::to_string(m.end) +
                                     ") exceeds chunk length " + std::to_string(length));
            }
            const Span global{chunk.start + m.start, chunk.start + m.end};
            found[global].insert(clustering.chunk_index);
            surface.emplace(global, m.surface);
        }
    }
    std::vector<GlobalMention> out;
    out.reserve(found.size());
    for (const auto& [span, occurrences] : found) {
        out.push_back({span.first, span.second, surface[span], {occurrences.begin(), occurrences.end()}});
    }
    return out;
}

PairStatMap chunk_pair_increments(const resolver::LocalClustering& clustering, const segmenter::Chunk& chunk,
                                  std::span<const GlobalMention> mentions) {
    const std::size_t n = clustering.mentions.size();
    std::vector<MentionId> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = clustering.mentions[i];
        ids[i] = id_of(mentions, chunk.start + m.start, chunk.start + m.end);
    }
    // Mentions outside every cluster get a label of their own.
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), clustering.clusters.size());
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        for (std::size_t idx : clustering.clusters[c]) {
            if (idx < n) {
                label[idx] = c;
            }
        }
    }
    PairStatMap out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (ids[i] == ids[j]) {
                continue;
            }
            auto& stat = out[MentionPair::of(ids[i], ids[j])];
            if (label[i] == label[j]) {
                stat.s = 1;
            } else {
                stat.t = 1;
            }
        }
    }
    return out;
}

PairStatMap accumulate_pair_stats(std::span<const resolver::LocalClustering> clusterings,
                                  std::span<const segmenter::Chunk> chunks, std::span<const GlobalMention> mentions) {
    PairStatMap total;
    for (const auto& clustering : clusterings) {
        if (clustering.chunk_index >= chunks.size()) {
            throw IntegrityError("clustering references missing chunk " + std::to_string(clustering.chunk_index));
        }
        for (const auto& [pair, inc] : chunk_pair_increments(clustering, chunks[clustering.chunk_index], mentions)) {
            auto& stat = total[pair];
            stat.s += inc.s;
            stat.t += inc.t;
        }
    }
    return total;
}

double direct_distance(const PairStat& stat) {
    if (stat.s + stat.t == 0) {
        throw std::invalid_argument("direct distance of a pair that was never co-present");
    }
    return static_cast<double>(stat.s) / static_cast<double>(stat.s + stat.t);
}

DirectMap direct_distances(const PairStatMap& stats) {
    DirectMap out;
    for (const auto& [pair, stat] : stats) {
        out.emplace_hint(out.end(), pair, direct_distance(stat));
    }
    return out;
}

DistanceMap all_pairs_max_product(const DirectMap& direct, std::size_t parallelism) {
    const Adjacency adj = build_adjacency(direct);
    const std::size_t n = adj.nodes.size();
    const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(1, n));

    std::vector<std::vector<std::pair<std::size_t, double>>> best(n);
    auto run = [&](std::size_t worker) {
        std::vector<double> dist(n, 0.0);
        std::vector<char> visited(n, 0);
        std::vector<std::size_t> touched;
        for (std::size_t source = worker; source < n; source += workers) {
            max_product_from(adj, source, dist, visited, touched, best[source]);
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back(run, w);
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    DistanceMap out;
    for (std::size_t source = 0; source < n; ++source) {
        for (const auto& [target, d] : best[source]) {
            out.emplace(MentionPair{adj.nodes[source], adj.nodes[target]}, DistanceEntry{d, Provenance::propagated});
        }
    }
    for (const auto& [pair, raw] : direct) {
        const double w = std::clamp(raw, 0.0, 1.0);
        auto [it, inserted] = out.emplace(pair, DistanceEntry{w, Provenance::direct});
        if (!inserted && it->second.d <= w) {
            it->second = {w, Provenance::direct};
        }
    }
    return out;
}

MentionGraph build_graph(const DistanceMap& distances, std::size_t node_count, double k) {
    if (!(k >= 0.0 && k <= 1.0)) {
        throw std::invalid_argument("threshold must lie in [0, 1]");
    }
    MentionGraph graph;
    graph.node_count = node_count;
    for (const auto& [pair, entry] : distances) {
        if (pair.a == pair.b || pair.b >= node_count) {
            continue;
        }
        if (entry.d > k) {
            graph.edges.push_back(pair);
        }
    }
    return graph;
}

std::vector<GlobalCluster> components(const MentionGraph& graph) {
    std::vector<std::size_t> parent(graph.node_count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : graph.edges) {
        const auto ra = find(e.a);
        const auto rb = find(e.b);
        if (ra != rb) {
            parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    }
    // Roots are the smallest member, so clusters come out in first-member order.
    std::vector<GlobalCluster> clusters;
    std::vector<std::size_t> slot(graph.node_count, SIZE_MAX);
    for (std::size_t v = 0; v < graph.node_count; ++v) {
        const auto root = find(v);
        if (slot[root] == SIZE_MAX) {
            slot[root] = clusters.size();
            clusters.emplace_back();
        }
        clusters[slot[root]].members.push_back(v);
    }
    return clusters;
}

MergeResult merge(std::span<const resolver::LocalClustering> clusterings, std::span<const segmenter::Chunk> chunks,
                  double k, std::size_t parallelism) {
    MergeResult result;
    result.mentions = unify_mentions(clusterings, chunks);
    result.pair_stats = accumulate_pair_stats(clusterings, chunks, result.mentions);
    result.distances = all_pairs_max_product(direct_distances(result.pair_stats), parallelism);
    result.graph = build_graph(result.distances, result.mentions.size(), k);
    result.clusters = components(result.graph);
    return result;
}

} // namespace lqca::merge
