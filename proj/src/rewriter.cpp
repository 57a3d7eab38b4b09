#include "lqca/rewriter.hpp"

#include "lqca/text.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace lqca::rewriter {

std::vector<Edit> resolve_overlaps(std::vector<Edit> candidates, std::size_t* dropped) {
    std::sort(candidates.begin(), candidates.end(), [](const Edit& x, const Edit& y) {
        if (x.length() != y.length()) {
            return x.length() > y.length();
        }
        return x.start < y.start;
    });
    std::map<std::size_t, std::size_t> kept; // start -> end
    std::vector<Edit> out;
    std::size_t lost = 0;
    for (auto& e : candidates) {
        auto next = kept.lower_bound(e.start);
        const bool hits_next = next != kept.end() && next->first < e.end;
        const bool hits_prev = next != kept.begin() && std::prev(next)->second > e.start;
        if (hits_next || hits_prev) {
            ++lost;
            continue;
        }
        kept.emplace(e.start, e.end);
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const Edit& x, const Edit& y) { return x.start < y.start; });
    if (dropped != nullptr) {
        *dropped = lost;
    }
    return out;
}

EditPlan plan_edits(std::span<const merge::GlobalCluster> clusters, std::span<const merge::GlobalMention> mentions,
                    std::span<const std::size_t> sentence_starts) {
    std::vector<Edit> candidates;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& cluster = clusters[c];
        if (!cluster.representative) {
            continue;
        }
        const auto& rep = mentions[*cluster.representative];
        const auto rep_norm = text::normalize_surface(rep.surface);

        // Representative text with internal whitespace collapsed, case kept.
        std::string replacement;
        for (char ch : rep.surface) {
            if (text::is_space(ch)) {
                if (!replacement.empty() && replacement.back() != ' ') {
                    replacement.push_back(' ');
                }
            } else {
                replacement.push_back(ch);
            }
        }
        while (!replacement.empty() && replacement.back() == ' ') {
            replacement.pop_back();
        }

        for (auto id : cluster.members) {
            if (id == *cluster.representative) {
                continue;
            }
            const auto& m = mentions[id];
            if (text::normalize_surface(m.surface) == rep_norm) {
                continue;
            }
            Edit edit{m.start, m.end, replacement, c};
            if (!edit.replacement.empty() && text::is_lower(edit.replacement.front()) &&
                std::binary_search(sentence_starts.begin(), sentence_starts.end(), m.start)) {
                edit.replacement.front() = static_cast<char>(edit.replacement.front() - 'a' + 'A');
            }
            candidates.push_back(std::move(edit));
        }
    }
    EditPlan plan;
    plan.edits = resolve_overlaps(std::move(candidates), &plan.dropped);
    return plan;
}

RewriteResult apply_edits(std::string_view text, std::span<const Edit> edits) {
    RewriteResult result;
    result.offset_map.resize(text.size() + 1);
    result.text.reserve(text.size());
    std::size_t cursor = 0;
    for (const auto& e : edits) {
        if (e.start < cursor || e.end < e.start || e.end > text.size()) {
            throw std::invalid_argument("edits must be sorted, disjoint and inside the text");
        }
        for (std::size_t i = cursor; i < e.start; ++i) {
            result.offset_map[i] = result.text.size();
            result.text.push_back(text[i]);
        }
        const std::size_t at = result.text.size();
        for (std::size_t i = e.start; i < e.end; ++i) {
            result.offset_map[i] = at;
        }
        result.text += e.replacement;
        cursor = e.end;
    }
    for (std::size_t i = cursor; i < text.size(); ++i) {
        result.offset_map[i] = result.text.size();
        result.text.push_back(text[i]);
    }
    result.offset_map[text.size()] = result.text.size();
    result.applied = edits.size();
    return result;
}

} // namespace lqca::rewriter
