#pragma once

#include "lqca/rewriter.hpp"

#include <random>
#include <string>
#include <vector>

namespace lqca::testing {

/// Random sorted, disjoint edits over `text` with replacements of varying length.
template <typename Rng>
std::vector<rewriter::Edit> random_edit_plan(Rng& rng, const std::string& text) {
    std::vector<rewriter::Edit> edits;
    std::uniform_int_distribution<int> gap(0, 12);
    std::uniform_int_distribution<int> len(0, 8);
    std::uniform_int_distribution<int> rep_len(0, 12);
    std::size_t pos = gap(rng);
    while (pos < text.size()) {
        const std::size_t end = std::min(text.size(), pos + len(rng));
        std::string replacement;
        const int n = rep_len(rng);
        for (int i = 0; i < n; ++i) {
            replacement += static_cast<char>('A' + (rng() % 26));
        }
        edits.push_back({pos, end, replacement, edits.size()});
        // zero-length edits are insertions; keep the next one strictly after
        pos = end + 1 + gap(rng);
    }
    return edits;
}

} // namespace lqca::testing
