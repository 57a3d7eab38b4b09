#include "lqca/errors.hpp"
#include "lqca/pipeline.hpp"
#include "support/mock_server.hpp"
#include "support/synthetic.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <random>
#include <set>

using namespace lqca;

namespace {

using SpanSet = std::set<std::set<std::pair<std::size_t, std::size_t>>>;

SpanSet global_spans(const merge::MergeResult& m) {
    SpanSet out;
    for (const auto& c : m.clusters) {
        std::set<std::pair<std::size_t, std::size_t>> spans;
        for (auto id : c.members) {
            spans.insert({m.mentions[id].start, m.mentions[id].end});
        }
        out.insert(spans);
    }
    return out;
}

SpanSet local_spans(const resolver::LocalClustering& c) {
    SpanSet out;
    for (const auto& cluster : c.clusters) {
        std::set<std::pair<std::size_t, std::size_t>> spans;
        for (auto i : cluster) {
            spans.insert({c.mentions[i].start, c.mentions[i].end});
        }
        out.insert(spans);
    }
    return out;
}

} // namespace

TEST(PipelineConfig, Validation) {
    PipelineConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.threshold = 1.2;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.threshold = 0.5;
    cfg.chunk.max_tokens = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.chunk.max_tokens = 10;
    cfg.parallelism = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Pipeline, SingleChunkEquivalence) {
    std::mt19937 rng(123);
    for (int i = 0; i < 10; ++i) {
        const auto text = lqca::testing::synthetic_document(rng, 20);
        PipelineConfig cfg;
        cfg.chunk.max_tokens = 100000;
        const auto r = rewrite_document(text, cfg);
        ASSERT_EQ(r.segmentation.chunks.size(), 1u);
        EXPECT_EQ(global_spans(r.merged), local_spans(resolver::builtin_resolve(text)));
    }
}

TEST(Pipeline, FixedPointWithinOneChunk) {
    std::mt19937 rng(321);
    for (int i = 0; i < 50; ++i) {
        const auto text = lqca::testing::synthetic_document(rng, 5 + i);
        PipelineConfig cfg;
        cfg.chunk.max_tokens = 100000;
        const auto once = rewrite_document(text, cfg).rewrite.text;
        EXPECT_EQ(rewrite_document(once, cfg).rewrite.text, once) << text;
    }
}

TEST(Pipeline, FixedPointOnStoryFixture) {
    // Sliding only: without overlap the pronouns left at the window edge move
    // into their antecedent's chunk once the first pass lengthens the text.
    std::ifstream in(std::string(LQCA_FIXTURE_DIR) + "/story.txt");
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const PipelineConfig cfg;
    const auto once = rewrite_document(text, cfg).rewrite.text;
    EXPECT_EQ(rewrite_document(once, cfg).rewrite.text, once);
}

TEST(Pipeline, RewritingCanMoveChunkBoundaries) {
    // "him" -> "Dr. Okafor" adds two tokens, so on the second pass the stride
    // lands on the middle sentence and "They" finally shares a window with Gus.
    const std::string text =
        "When asked, Dr. Okafor met him. Gus said him friends were near the river? They followed Jun before dawn!";
    PipelineConfig cfg;
    cfg.chunk.max_tokens = 20;
    const auto first = rewrite_document(text, cfg);
    EXPECT_EQ(first.rewrite.text,
              "When asked, Dr. Okafor met Dr. Okafor. Gus said Gus friends were near the river? They followed Jun "
              "before dawn!");
    EXPECT_EQ(first.segmentation.chunks[1].first_unit, 2u);
    const auto second = rewrite_document(first.rewrite.text, cfg);
    EXPECT_EQ(second.segmentation.chunks[1].first_unit, 1u);
    EXPECT_NE(second.rewrite.text.find("Gus followed Jun"), std::string::npos);
}

TEST(Pipeline, CrossChunkPronounResolution) {
    // 5 + 4 + 5 tokens with a budget of 10: sliding windows are {s0,s1} and
    // {s1,s2}, so the pronoun reaches the first Maria through the second.
    const std::string text = "Maria opened the shop. Maria sold bread. Then she went home.";
    PipelineConfig cfg;
    cfg.chunk.max_tokens = 10;
    const auto sliding = rewrite_document(text, cfg);
    ASSERT_EQ(sliding.segmentation.chunks.size(), 2u);
    EXPECT_EQ(sliding.rewrite.text, "Maria opened the shop. Maria sold bread. Then Maria went home.");
    ASSERT_EQ(sliding.merged.clusters.size(), 1u);

    // Without overlap the pronoun sits alone in the second chunk.
    cfg.chunk.mode = segmenter::ChunkMode::non_overlap;
    const auto split = rewrite_document(text, cfg);
    ASSERT_EQ(split.segmentation.chunks.size(), 2u);
    EXPECT_EQ(split.rewrite.text, text);
}

TEST(Pipeline, EmptyDocument) {
    const auto r = rewrite_document("", {});
    EXPECT_EQ(r.rewrite.text, "");
    EXPECT_TRUE(r.merged.clusters.empty());
}

TEST(Pipeline, Deterministic) {
    std::mt19937 rng(9);
    const auto text = lqca::testing::synthetic_document(rng, 60);
    PipelineConfig cfg;
    cfg.chunk.max_tokens = 64;
    cfg.parallelism = 3;
    const auto a = rewrite_document(text, cfg);
    const auto b = rewrite_document(text, cfg);
    EXPECT_EQ(a.rewrite.text, b.rewrite.text);
    EXPECT_EQ(inspect_json(a), inspect_json(b));
}

TEST(Pipeline, TransportFailureIsStageTagged) {
    PipelineConfig cfg;
    cfg.resolver = resolver::BackendKind::wire;
    cfg.resolver_endpoint = "http://127.0.0.1:" + std::to_string(lqca::testing::unused_port());
    cfg.wire_retries = 0;
    cfg.wire_timeout = std::chrono::milliseconds(500);
    auto backend = make_resolver(cfg);
    auto tagger = make_tagger(cfg);
    try {
        analyze("Alice slept. She woke.", cfg, *backend, *tagger);
        FAIL() << "expected TransportError";
    } catch (const TransportError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("[resolve]"), std::string::npos) << what;
        EXPECT_NE(what.find("chunk 0"), std::string::npos) << what;
    }
}

TEST(Pipeline, LlmBackendNeedsChatModel) {
    PipelineConfig cfg;
    cfg.resolver = resolver::BackendKind::llm;
    EXPECT_THROW(make_resolver(cfg), ConfigError);
}

TEST(Pipeline, WireBackendsEndToEnd) {
    // A stand-in adapter that resolves with the rule resolver and tags with the lexicon.
    lqca::testing::MockServer server([](httplib::Server& s) {
        s.Post("/resolve", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            const std::string text = body["text"];
            const auto c = resolver::builtin_resolve(text);
            nlohmann::json out = {{"mentions", nlohmann::json::array()}, {"clusters", c.clusters}};
            for (const auto& m : c.mentions) {
                out["mentions"].push_back({{"start", m.start}, {"end", m.end}}); // ASCII: bytes == code points
            }
            res.set_content(out.dump(), "application/json");
        });
        s.Post("/tag", [](const httplib::Request& req, httplib::Response& res) {
            const std::string text = nlohmann::json::parse(req.body)["text"];
            nlohmann::json out = {{"tokens", nlohmann::json::array()}};
            for (const auto& t : representative::tag_pronouns(text)) {
                out["tokens"].push_back(
                    {{"start", t.start}, {"end", t.end}, {"pos", t.pos == representative::PosTag::pron ? "PRON" : "X"}});
            }
            res.set_content(out.dump(), "application/json");
        });
    });
    const std::string text = "Alice met Carol. She smiled. Then Alice left.";
    PipelineConfig cfg;
    cfg.resolver = resolver::BackendKind::wire;
    cfg.resolver_endpoint = server.url();
    cfg.tagger = TaggerKind::wire;
    cfg.tagger_endpoint = server.url();
    auto backend = make_resolver(cfg);
    auto tagger = make_tagger(cfg);
    EXPECT_EQ(rewrite_document(text, cfg, *backend, *tagger).rewrite.text, rewrite_document(text, {}).rewrite.text);
}

TEST(InspectJson, HasSortedSections) {
    const auto r = analyze("Alice slept. She woke.", {}, *make_resolver({}), *make_tagger({}));
    const auto doc = nlohmann::json::parse(inspect_json(r));
    for (const char* key : {"chunks", "mentions", "pair_stats", "distances", "graph", "clusters"}) {
        EXPECT_TRUE(doc.contains(key)) << key;
    }
    const auto sidecar = nlohmann::json::parse(rewrite_sidecar_json(rewrite_document("Alice slept. She woke.", {})));
    EXPECT_TRUE(sidecar.contains("offset_map"));
}
