#include "lqca/errors.hpp"
#include "lqca/resolver.hpp"
#include "support/fake_chat.hpp"
#include "support/mock_server.hpp"
#include "support/synthetic.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <random>
#include <set>
#include <string>
#include <vector>

using namespace lqca;
using namespace lqca::resolver;
using nlohmann::json;

namespace {

// Clusters rendered as surface lists, for readable expectations.
std::vector<std::vector<std::string>> surfaces(const LocalClustering& c) {
    std::vector<std::vector<std::string>> out;
    for (const auto& cluster : c.clusters) {
        std::vector<std::string> names;
        for (auto i : cluster) {
            names.push_back(c.mentions[i].surface);
        }
        out.push_back(names);
    }
    return out;
}

using Surfaces = std::vector<std::vector<std::string>>;

void expect_valid(const LocalClustering& c, std::string_view text) {
    std::set<std::size_t> seen;
    for (const auto& m : c.mentions) {
        ASSERT_LT(m.start, m.end);
        ASSERT_LE(m.end, text.size());
        EXPECT_EQ(text.substr(m.start, m.end - m.start), m.surface);
    }
    for (const auto& cluster : c.clusters) {
        for (auto i : cluster) {
            ASSERT_LT(i, c.mentions.size());
            EXPECT_TRUE(seen.insert(i).second) << "mention " << i << " in two clusters";
        }
    }
}

} // namespace

TEST(BuiltinResolve, PronounFollowsName) {
    const auto c = builtin_resolve("Alice slept. She woke.");
    EXPECT_EQ(surfaces(c), (Surfaces{{"Alice", "She"}}));
    EXPECT_EQ(c.clusters, (std::vector<std::vector<std::size_t>>{{0, 1}}));
}

TEST(BuiltinResolve, PronounWithoutAntecedentIsSingleton) {
    EXPECT_EQ(surfaces(builtin_resolve("It rains.")), (Surfaces{{"It"}}));
}

TEST(BuiltinResolve, IdenticalSurfacesMerge) {
    EXPECT_EQ(surfaces(builtin_resolve("Bob met Bob.")), (Surfaces{{"Bob", "Bob"}}));
}

TEST(BuiltinResolve, NearestPrecedingAntecedent) {
    EXPECT_EQ(surfaces(builtin_resolve("Alice met Carol. She smiled.")), (Surfaces{{"Alice"}, {"Carol", "She"}}));
}

TEST(BuiltinResolve, LowercaseTextHasNoMentions) {
    EXPECT_TRUE(builtin_resolve("alice slept.").mentions.empty());
}

TEST(BuiltinResolve, ExactSurfaceMatching) {
    EXPECT_EQ(surfaces(builtin_resolve("Alice met Alice Smith.")), (Surfaces{{"Alice"}, {"Alice Smith"}}));
}

TEST(BuiltinResolve, AbbreviationStaysInsideRun) {
    EXPECT_EQ(surfaces(builtin_resolve("Dr. Smith said he was late.")), (Surfaces{{"Dr. Smith", "he"}}));
}

TEST(BuiltinResolve, SentenceInitialFunctionWordIsNotAName) {
    EXPECT_EQ(surfaces(builtin_resolve("The dog barked. Then Rex ran.")), (Surfaces{{"Rex"}}));
}

TEST(BuiltinResolve, PureAndValidOnRandomText) {
    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i) {
        const auto text = lqca::testing::synthetic_document(rng, 15);
        const auto a = builtin_resolve(text, 3);
        expect_valid(a, text);
        EXPECT_EQ(a, builtin_resolve(text, 3));
        EXPECT_EQ(a.chunk_index, 3u);
        std::size_t members = 0;
        for (const auto& c : a.clusters) {
            members += c.size();
        }
        EXPECT_EQ(members, a.mentions.size());
    }
}

TEST(Normalize, DropsBadSpansDedupesAndEnforcesDisjointness) {
    const std::string text = "Ann saw Bo.";
    LocalClustering c;
    c.mentions = {{8, 10, "Bo"}, {0, 3, "Ann"}, {0, 3, "Ann"}, {5, 99, "bad"}};
    c.clusters = {{0, 1}, {2, 3}};
    const auto dropped = normalize(c, text);
    EXPECT_EQ(dropped, 1u);
    ASSERT_EQ(c.mentions.size(), 2u);
    EXPECT_EQ(c.mentions[0].surface, "Ann");
    EXPECT_EQ(c.mentions[1].surface, "Bo");
    // Ann was claimed by the first cluster; the second is left empty and removed.
    EXPECT_EQ(c.clusters, (std::vector<std::vector<std::size_t>>{{0, 1}}));
}

TEST(Normalize, LeftoverMentionsBecomeSingletons) {
    const std::string text = "Ann saw Bo.";
    LocalClustering c;
    c.mentions = {{0, 3, "Ann"}, {8, 10, "Bo"}};
    c.clusters = {};
    normalize(c, text);
    EXPECT_EQ(c.clusters.size(), 2u);
    expect_valid(c, text);
}

TEST(WireBackend, SendsChunkAndMapsCodePoints) {
    json seen;
    lqca::testing::MockServer server([&](httplib::Server& s) {
        s.Post("/resolve", [&](const httplib::Request& req, httplib::Response& res) {
            seen = json::parse(req.body);
            // "Zoë met Al. He waved." in code points: Zoë [0,3), Al [8,10), He [12,14)
            res.set_content(R"({"mentions":[{"start":0,"end":3},{"start":8,"end":10},{"start":12,"end":14}],
                               "clusters":[[1,2],[0]]})",
                            "application/json");
        });
    });
    const std::string text = "Zoë met Al. He waved.";
    WireBackend backend({server.url(), std::chrono::milliseconds(2000), {}});
    const auto c = resolve_chunk(text, 4, backend);
    EXPECT_EQ(seen["chunk_id"], 4);
    EXPECT_EQ(seen["text"], text);
    EXPECT_EQ(c.chunk_index, 4u);
    EXPECT_EQ(surfaces(c), (Surfaces{{"Zoë"}, {"Al", "He"}}));
    EXPECT_EQ(c.mentions[1].start, 9u); // bytes: ë is two
}

TEST(WireBackend, UnreachableServerNamesChunk) {
    WireBackend backend({"http://127.0.0.1:" + std::to_string(lqca::testing::unused_port()),
                         std::chrono::milliseconds(500),
                         {0, std::chrono::milliseconds(1), 1.0}});
    try {
        resolve_chunk("Alice.", 7, backend);
        FAIL() << "expected TransportError";
    } catch (const TransportError& e) {
        ASSERT_TRUE(e.chunk_index().has_value());
        EXPECT_EQ(*e.chunk_index(), 7u);
        EXPECT_NE(std::string(e.what()).find("chunk 7"), std::string::npos);
    }
}

TEST(WireBackend, MalformedResponseIsTransportError) {
    EXPECT_THROW(WireBackend::parse_response("{\"mentions\": 3}", "abc", 0), TransportError);
    EXPECT_THROW(WireBackend::parse_response("not json", "abc", 0), TransportError);
}

TEST(LlmBackend, ValidReplyPassesThrough) {
    const std::string text = "Alice met Bob. He smiled.";
    lqca::testing::FakeChat chat([](const std::string&) {
        return std::string("```json\n") +
               R"({"mentions":[{"start":0,"end":5,"text":"Alice"},{"start":10,"end":13,"text":"Bob"},)"
               R"({"start":15,"end":17,"text":"He"}],"clusters":[[1,2],[0]]})" + "\n```";
    });
    const auto c = llm_resolve(text, chat, 2);
    EXPECT_EQ(surfaces(c), (Surfaces{{"Alice"}, {"Bob", "He"}}));
    ASSERT_EQ(chat.prompts().size(), 1u);
    EXPECT_NE(chat.prompts()[0].find(text), std::string::npos);
}

TEST(LlmBackend, SpanBeyondChunkIsDropped) {
    const std::string text = "Alice met Bob.";
    const auto c = parse_llm_reply(
        R"({"mentions":[{"start":0,"end":5,"text":"Alice"},{"start":10,"end":40,"text":"Bob and more"}],"clusters":[[0,1]]})",
        text, 0);
    EXPECT_EQ(surfaces(c), (Surfaces{{"Alice"}}));
}

TEST(LlmBackend, EmptyOrGarbageReplyGivesZeroClusters) {
    EXPECT_TRUE(parse_llm_reply("", "Alice.", 0).clusters.empty());
    EXPECT_TRUE(parse_llm_reply("I cannot help with that {", "Alice.", 0).clusters.empty());
    EXPECT_TRUE(parse_llm_reply("{\"mentions\": oops}", "Alice.", 0).mentions.empty());
}

TEST(LlmBackend, ClusteringHonorsInvariantsAfterValidation) {
    const std::string text = "Alice met Bob.";
    const auto c = parse_llm_reply(
        R"({"mentions":[{"start":0,"end":5,"text":"Alice"},{"start":10,"end":13,"text":"Bob"}],"clusters":[[0,1],[1],[7]]})",
        text, 0);
    expect_valid(c, text);
}
