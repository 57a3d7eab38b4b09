#pragma once

#include "lqca/merge.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lqca::rewriter {

struct Edit {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string replacement;
    std::size_t cluster = 0;

    std::size_t length() const noexcept { return end - start; }
    bool operator==(const Edit&) const = default;
};

struct EditPlan {
    std::vector<Edit> edits; // disjoint, sorted by start
    std::size_t dropped = 0; // candidates lost to overlap resolution
};

struct RewriteResult {
    std::string text;
    // offset_map[i] is the rewritten position of original byte i; entry
    // text.size() maps the end. Bytes inside an edit map to its replacement start.
    std::vector<std::size_t> offset_map;
    std::size_t applied = 0;
    std::size_t dropped = 0;
};

/// Among overlapping candidates the longest span wins, then the earliest start.
/// Returns the survivors sorted by start.
std::vector<Edit> resolve_overlaps(std::vector<Edit> candidates, std::size_t* dropped = nullptr);

/// One candidate per cluster member whose normalized surface differs from its
/// cluster representative's. Clusters without a representative contribute
/// nothing. A replacement landing on a sentence start gets its first letter
/// capitalized. `sentence_starts` must be sorted.
EditPlan plan_edits(std::span<const merge::GlobalCluster> clusters, std::span<const merge::GlobalMention> mentions,
                    std::span<const std::size_t> sentence_starts);

/// Splices sorted, disjoint edits in one pass. Throws std::invalid_argument
/// when that ordering is broken or an edit runs past `text`.
RewriteResult apply_edits(std::string_view text, std::span<const Edit> edits);

} // namespace lqca::rewriter
