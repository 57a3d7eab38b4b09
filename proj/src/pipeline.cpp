#include "lqca/pipeline.hpp"

#include "lqca/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace lqca {

using nlohmann::json;

namespace {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    const std::string tag = std::string("[") + stage + "] ";
    try {
        return fn();
    } catch (const TransportError& e) {
        throw TransportError(tag + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(tag + e.what());
    } catch (const IntegrityError& e) {
        throw IntegrityError(tag + e.what());
    } catch (const ParseError& e) {
        throw ParseError(tag + e.what());
    }
}

std::vector<resolver::LocalClustering> resolve_all(std::string_view text, const segmenter::Segmentation& seg,
                                                   const PipelineConfig& config, resolver::Backend& backend) {
    const auto& chunks = seg.chunks;
    std::vector<resolver::LocalClustering> out(chunks.size());
    std::size_t workers = backend.concurrent() ? config.parallelism : 1;
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, chunks.size()));

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::size_t failed_chunk = SIZE_MAX;
    auto worker = [&] {
        for (std::size_t i = next++; i < chunks.size(); i = next++) {
            try {
                out[i] = resolver::resolve_chunk(segmenter::chunk_text(text, chunks[i]), i, backend);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                // Report the lowest failing chunk so reruns fail the same way.
                if (i < failed_chunk) {
                    failed_chunk = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < workers; ++w) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

json chunk_json(const segmenter::Chunk& c) {
    return {{"index", c.index},          {"start", c.start},
            {"end", c.end},              {"first_unit", c.first_unit},
            {"last_unit", c.last_unit},  {"token_start", c.token_start},
            {"token_count", c.token_count}, {"hard_split", c.hard_split}};
}

} // namespace

void PipelineConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ConfigError("threshold must lie in [0, 1]");
    }
    if (chunk.max_tokens < 1) {
        throw ConfigError("max chunk tokens must be at least 1");
    }
    if (parallelism < 1) {
        throw ConfigError("parallelism must be at least 1");
    }
    if (wire_retries < 0) {
        throw ConfigError("wire retries must not be negative");
    }
}

std::unique_ptr<resolver::Backend> make_resolver(const PipelineConfig& config, std::shared_ptr<qa::ChatModel> chat) {
    switch (config.resolver) {
    case resolver::BackendKind::builtin:
        return std::make_unique<resolver::BuiltinBackend>();
    case resolver::BackendKind::wire: {
        resolver::WireConfig wire;
        wire.endpoint = config.resolver_endpoint;
        wire.timeout = config.wire_timeout;
        wire.retry.max_retries = config.wire_retries;
        return std::make_unique<resolver::WireBackend>(wire);
    }
    case resolver::BackendKind::llm:
        if (!chat) {
            throw ConfigError("the llm resolver needs a chat model");
        }
        return std::make_unique<resolver::LlmBackend>(std::move(chat));
    }
    throw ConfigError("unknown resolver backend");
}

std::unique_ptr<representative::Tagger> make_tagger(const PipelineConfig& config) {
    if (config.tagger == TaggerKind::wire) {
        representative::WireTaggerConfig wire;
        wire.endpoint = config.tagger_endpoint;
        wire.timeout = config.wire_timeout;
        wire.retry.max_retries = config.wire_retries;
        return std::make_unique<representative::WireTagger>(wire);
    }
    return std::make_unique<representative::BuiltinTagger>();
}

PipelineResult analyze(std::string_view text, const PipelineConfig& config, resolver::Backend& backend,
                       representative::Tagger& tagger) {
    config.validate();
    PipelineResult r;
    r.segmentation = run_stage("segment", [&] { return segmenter::segment(text, config.chunk); });
    r.clusterings = run_stage("resolve", [&] { return resolve_all(text, r.segmentation, config, backend); });
    r.merged = run_stage("merge", [&] {
        return merge::merge(r.clusterings, r.segmentation.chunks, config.threshold, config.parallelism);
    });
    if (!r.merged.mentions.empty()) {
        r.tags = run_stage("tag", [&] { return tagger.tag(text); });
    }
    representative::assign_representatives(r.merged.clusters, r.merged.mentions, r.tags);
    return r;
}

PipelineResult rewrite_document(std::string_view text, const PipelineConfig& config, resolver::Backend& backend,
                                representative::Tagger& tagger) {
    auto r = analyze(text, config, backend, tagger);
    std::vector<std::size_t> sentence_starts;
    for (const auto& s : r.segmentation.sentences) {
        sentence_starts.push_back(s.start);
    }
    r.plan = rewriter::plan_edits(r.merged.clusters, r.merged.mentions, sentence_starts);
    r.rewrite = rewriter::apply_edits(text, r.plan.edits);
    r.rewrite.dropped = r.plan.dropped;
    return r;
}

PipelineResult rewrite_document(std::string_view text, const PipelineConfig& config) {
    resolver::BuiltinBackend backend;
    representative::BuiltinTagger tagger;
    return rewrite_document(text, config, backend, tagger);
}

std::string inspect_json(const PipelineResult& r, int indent) {
    const auto& m = r.merged;
    json chunks = json::array();
    for (const auto& c : r.segmentation.chunks) {
        chunks.push_back(chunk_json(c));
    }
    json mentions = json::array();
    for (std::size_t i = 0; i < m.mentions.size(); ++i) {
        const auto& g = m.mentions[i];
        mentions.push_back({{"id", i},
                            {"start", g.start},
                            {"end", g.end},
                            {"surface", g.surface},
                            {"occurrences", g.occurrences},
                            {"pronoun", representative::is_pronoun_mention(g.start, g.end, r.tags)}});
    }
    json stats = json::array();
    for (const auto& [pair, st] : m.pair_stats) {
        stats.push_back({{"a", pair.a}, {"b", pair.b}, {"s", st.s}, {"t", st.t}});
    }
    json distances = json::array();
    for (const auto& [pair, entry] : m.distances) {
        distances.push_back({{"a", pair.a},
                             {"b", pair.b},
                             {"d", entry.d},
                             {"provenance", entry.provenance == merge::Provenance::direct ? "direct" : "propagated"}});
    }
    json edges = json::array();
    for (const auto& e : m.graph.edges) {
        edges.push_back({e.a, e.b});
    }
    json clusters = json::array();
    for (const auto& c : m.clusters) {
        clusters.push_back({{"members", c.members},
                            {"representative", c.representative ? json(*c.representative) : json(nullptr)}});
    }
    json doc = {{"chunks", std::move(chunks)},
                {"mentions", std::move(mentions)},
                {"pair_stats", std::move(stats)},
                {"distances", std::move(distances)},
                {"graph", {{"nodes", m.graph.node_count}, {"edges", std::move(edges)}}},
                {"clusters", std::move(clusters)}};
    return doc.dump(indent);
}

std::string rewrite_sidecar_json(const PipelineResult& r, int indent) {
    json edits = json::array();
    for (const auto& e : r.plan.edits) {
        edits.push_back({{"start", e.start}, {"end", e.end}, {"replacement", e.replacement}, {"cluster", e.cluster}});
    }
    json doc = {{"edits", std::move(edits)},
                {"offset_map", r.rewrite.offset_map},
                {"applied", r.rewrite.applied},
                {"dropped", r.rewrite.dropped}};
    return doc.dump(indent);
}

} // namespace lqca
