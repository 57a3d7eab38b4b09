#pragma once

#include "lqca/merge.hpp"
#include "lqca/representative.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lqca::testing {

struct RepresentativeCase {
    std::string name;
    std::vector<std::string> surfaces; // cluster members in document order
    std::optional<std::size_t> expected; // index into surfaces, none for no representative
};

inline const std::vector<RepresentativeCase>& representative_cases() {
    static const std::vector<RepresentativeCase> cases = {
        {"pronouns excluded, tie goes to earlier surface",
         {"he", "Dr. Smith", "he", "the doctor", "he", "Dr. Smith", "the doctor", "he", "he"},
         1},
        {"all pronouns", {"it", "they"}, std::nullopt},
        {"singleton", {"Rome"}, 0},
        {"tie with the description first", {"the doctor", "Dr. Smith", "Dr. Smith", "the doctor"}, 0},
        {"frequency beats earliness", {"Bo", "Ann", "Ann"}, 1},
        {"case folded surfaces group", {"Bob", "ALICE", "Alice"}, 1},
        {"internal whitespace collapses", {"Kim", "Mary  Ann", "Mary Ann"}, 1},
        {"mention containing a pronoun counts as pronoun", {"her sister", "her sister", "Jane"}, 2},
        {"three way tie takes the first", {"Cy", "Di", "Ed"}, 0},
        {"mixed case pronouns only", {"She", "HIM", "they"}, std::nullopt},
    };
    return cases;
}

/// Builds the text of a case; the single cluster holds every mention.
struct RepresentativeFixture {
    std::string text;
    std::vector<merge::GlobalMention> mentions;
    std::vector<representative::TaggedToken> tags;
    merge::GlobalCluster cluster;
};

inline RepresentativeFixture materialize(const RepresentativeCase& c) {
    RepresentativeFixture f;
    for (std::size_t i = 0; i < c.surfaces.size(); ++i) {
        if (i > 0) {
            f.text += " and ";
        }
        const auto start = f.text.size();
        f.text += c.surfaces[i];
        f.mentions.push_back({start, f.text.size(), c.surfaces[i], {0}});
        f.cluster.members.push_back(i);
    }
    f.text += ".";
    f.tags = representative::tag_pronouns(f.text);
    return f;
}

} // namespace lqca::testing
