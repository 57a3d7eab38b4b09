#include "lqca/errors.hpp"
#include "lqca/representative.hpp"
#include "support/mock_server.hpp"
#include "support/representative_cases.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <random>

using namespace lqca;
using namespace lqca::representative;

namespace {

std::vector<PosTag> pos_of(const std::vector<TaggedToken>& tags) {
    std::vector<PosTag> out;
    for (const auto& t : tags) {
        out.push_back(t.pos);
    }
    return out;
}

} // namespace

TEST(TagPronouns, LexiconHitsOnly) {
    EXPECT_EQ(pos_of(tag_pronouns("She left")), (std::vector<PosTag>{PosTag::pron, PosTag::other}));
    EXPECT_EQ(pos_of(tag_pronouns("Shelly left")), (std::vector<PosTag>{PosTag::other, PosTag::other}));
    EXPECT_EQ(pos_of(tag_pronouns("THEY ran")), (std::vector<PosTag>{PosTag::pron, PosTag::other}));
}

TEST(TagPronouns, WholeLexicon) {
    for (const char* w : {"he", "she", "it", "they", "him", "her", "them", "his", "hers", "its", "their", "theirs",
                          "i", "you", "we", "me", "us", "this", "that", "these", "those", "who", "whom", "which",
                          "himself", "herself", "itself", "themselves", "myself", "yourself", "ourselves"}) {
        EXPECT_TRUE(is_pronoun_word(w)) << w;
    }
    EXPECT_FALSE(is_pronoun_word("hello"));
    EXPECT_FALSE(is_pronoun_word("the"));
}

TEST(IsPronounMention, AnyOverlappingToken) {
    const std::string text = "Alice took her book.";
    const auto tags = tag_pronouns(text);
    EXPECT_TRUE(is_pronoun_mention(11, 19, tags));  // "her book"
    EXPECT_FALSE(is_pronoun_mention(0, 5, tags));   // "Alice"
    EXPECT_FALSE(is_pronoun_mention(5, 6, tags));   // a lone space, no tokens
    EXPECT_TRUE(is_pronoun_mention(12, 13, tags));  // partial overlap still counts
}

TEST(SelectRepresentative, FixtureTable) {
    for (const auto& c : lqca::testing::representative_cases()) {
        const auto f = lqca::testing::materialize(c);
        const auto got = select_representative(f.cluster, f.mentions, f.tags);
        EXPECT_EQ(got, c.expected) << c.name;
    }
}

TEST(SelectRepresentative, NeverPicksPronoun) {
    for (const auto& c : lqca::testing::representative_cases()) {
        const auto f = lqca::testing::materialize(c);
        if (const auto got = select_representative(f.cluster, f.mentions, f.tags)) {
            EXPECT_FALSE(is_pronoun_mention(f.mentions[*got].start, f.mentions[*got].end, f.tags)) << c.name;
        }
    }
}

TEST(SelectRepresentative, InvariantToMemberOrder) {
    std::mt19937 rng(3);
    for (const auto& c : lqca::testing::representative_cases()) {
        auto f = lqca::testing::materialize(c);
        const auto want = select_representative(f.cluster, f.mentions, f.tags);
        for (int i = 0; i < 10; ++i) {
            std::shuffle(f.cluster.members.begin(), f.cluster.members.end(), rng);
            EXPECT_EQ(select_representative(f.cluster, f.mentions, f.tags), want) << c.name;
        }
    }
}

TEST(SelectRepresentative, AddingPronounKeepsChoice) {
    for (const auto& c : lqca::testing::representative_cases()) {
        for (const char* pronoun : {"he", "Them", "itself"}) {
            auto extended = c;
            extended.surfaces.push_back(pronoun);
            extended.surfaces.insert(extended.surfaces.begin(), pronoun);
            auto f = lqca::testing::materialize(extended);
            auto got = select_representative(f.cluster, f.mentions, f.tags);
            std::optional<std::size_t> want;
            if (c.expected) {
                want = *c.expected + 1; // shifted by the leading pronoun
            }
            EXPECT_EQ(got, want) << c.name << " + " << pronoun;
        }
    }
}

TEST(AssignRepresentatives, FillsEveryCluster) {
    const auto f = lqca::testing::materialize({"x", {"Ann", "she", "Ann"}, 0});
    std::vector<merge::GlobalCluster> clusters = {{{0, 2}, {}}, {{1}, {}}};
    assign_representatives(clusters, f.mentions, f.tags);
    EXPECT_EQ(clusters[0].representative, std::optional<merge::MentionId>(0));
    EXPECT_FALSE(clusters[1].representative.has_value());
}

TEST(WireTagger, MapsCodePointsAndTags) {
    lqca::testing::MockServer server([](httplib::Server& s) {
        s.Post("/tag", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            EXPECT_EQ(body["text"], "Zoë saw him");
            res.set_content(R"({"tokens":[{"start":0,"end":3,"pos":"PROPN"},{"start":4,"end":7,"pos":"VERB"},)"
                            R"({"start":8,"end":11,"pos":"PRON"}]})",
                            "application/json");
        });
    });
    WireTagger tagger({server.url(), std::chrono::milliseconds(2000), {}});
    const auto tags = tagger.tag("Zoë saw him");
    ASSERT_EQ(tags.size(), 3u);
    EXPECT_EQ(tags[0], (TaggedToken{0, 4, PosTag::other}));
    EXPECT_EQ(tags[2], (TaggedToken{9, 12, PosTag::pron}));
}

TEST(WireTagger, MalformedResponseIsTransportError) {
    EXPECT_THROW(WireTagger::parse_response("{}", "abc"), TransportError);
    EXPECT_THROW(WireTagger::parse_response(R"({"tokens":[{"start":0,"end":9,"pos":"X"}]})", "abc"), TransportError);
}
