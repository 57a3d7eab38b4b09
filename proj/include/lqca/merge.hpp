#pragma once

#include "lqca/resolver.hpp"
#include "lqca/segmenter.hpp"

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lqca::merge {

/// Index into the document-ordered GlobalMention list.
using MentionId = std::size_t;

struct GlobalMention {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string surface;
    std::vector<std::size_t> occurrences; // chunk indices, ascending

    bool operator==(const GlobalMention&) const = default;
};

/// Unordered mention pair stored with a < b.
struct MentionPair {
    MentionId a = 0;
    MentionId b = 0;

    static MentionPair of(MentionId x, MentionId y) { return x < y ? MentionPair{x, y} : MentionPair{y, x}; }
    auto operator<=>(const MentionPair&) const = default;
};

/// Agreement counters over the chunks where both mentions were detected.
struct PairStat {
    std::size_t s = 0; // chunks placing the pair in one cluster
    std::size_t t = 0; // chunks placing them apart

    bool operator==(const PairStat&) const = default;
};

using PairStatMap = std::map<MentionPair, PairStat>;
using DirectMap = std::map<MentionPair, double>;

enum class Provenance { direct, propagated };

struct DistanceEntry {
    double d = 0.0;
    Provenance provenance = Provenance::direct;
};

using DistanceMap = std::map<MentionPair, DistanceEntry>;

struct MentionGraph {
    std::size_t node_count = 0;
    std::vector<MentionPair> edges; // sorted, unique, a < b
};

struct GlobalCluster {
    std::vector<MentionId> members; // ascending, i.e. document order
    std::optional<MentionId> representative;

    bool operator==(const GlobalCluster&) const = default;
};

/// Shifts local spans by their chunk's start and merges identical global
/// spans. Output is sorted by (start, end). Throws IntegrityError when a local
/// span falls outside its chunk or names a chunk that does not exist.
std::vector<GlobalMention> unify_mentions(std::span<const resolver::LocalClustering> clusterings,
                                          std::span<const segmenter::Chunk> chunks);

/// Contribution of a single chunk: every co-present pair gets exactly one of
/// s or t incremented.
PairStatMap chunk_pair_increments(const resolver::LocalClustering& clustering, const segmenter::Chunk& chunk,
                                  std::span<const GlobalMention> mentions);

PairStatMap accumulate_pair_stats(std::span<const resolver::LocalClustering> clusterings,
                                  std::span<const segmenter::Chunk> chunks, std::span<const GlobalMention> mentions);

/// s / (s + t). Throws std::invalid_argument when the pair was never co-present.
double direct_distance(const PairStat& stat);

DirectMap direct_distances(const PairStatMap& stats);

/// Max-product path closure. One Dijkstra-style pass per source node, where a
/// path's weight is the product of its edge weights and the heaviest path
/// wins. Edge weights are clamped into [0, 1]. Pairs whose best path weight is
/// 0 are omitted unless they carry a direct entry.
DistanceMap all_pairs_max_product(const DirectMap& direct, std::size_t parallelism = 1);

/// Edge iff d > k (strict).
MentionGraph build_graph(const DistanceMap& distances, std::size_t node_count, double k);

/// Connected components; every node appears in exactly one cluster. Clusters
/// are ordered by their first member.
std::vector<GlobalCluster> components(const MentionGraph& graph);

struct MergeResult {
    std::vector<GlobalMention> mentions;
    PairStatMap pair_stats;
    DistanceMap distances;
    MentionGraph graph;
    std::vector<GlobalCluster> clusters;
};

MergeResult merge(std::span<const resolver::LocalClustering> clusterings, std::span<const segmenter::Chunk> chunks,
                  double k, std::size_t parallelism = 1);

} // namespace lqca::merge
