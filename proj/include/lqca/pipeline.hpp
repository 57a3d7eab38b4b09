#pragma once

#include "lqca/chat.hpp"
#include "lqca/merge.hpp"
#include "lqca/representative.hpp"
#include "lqca/resolver.hpp"
#include "lqca/rewriter.hpp"
#include "lqca/segmenter.hpp"

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace lqca {

enum class TaggerKind { builtin, wire };

struct PipelineConfig {
    segmenter::ChunkConfig chunk; // token budget defaults to 512, sliding windows
    double threshold = 0.9;
    resolver::BackendKind resolver = resolver::BackendKind::builtin;
    std::string resolver_endpoint = "http://127.0.0.1:8765";
    TaggerKind tagger = TaggerKind::builtin;
    std::string tagger_endpoint = "http://127.0.0.1:8765";
    std::size_t parallelism = 1;
    std::chrono::milliseconds wire_timeout{30000};
    int wire_retries = 2;

    /// Throws ConfigError unless 0 <= threshold <= 1, budget >= 1 and
    /// parallelism >= 1.
    void validate() const;
};

struct PipelineResult {
    segmenter::Segmentation segmentation;
    std::vector<resolver::LocalClustering> clusterings; // one per chunk, in chunk order
    merge::MergeResult merged;                          // clusters carry representatives
    std::vector<representative::TaggedToken> tags;
    rewriter::EditPlan plan;
    rewriter::RewriteResult rewrite;
};

/// Builds the resolver backend named by the config. `chat` is required for
/// the llm backend and ignored otherwise.
std::unique_ptr<resolver::Backend> make_resolver(const PipelineConfig& config,
                                                 std::shared_ptr<qa::ChatModel> chat = nullptr);
std::unique_ptr<representative::Tagger> make_tagger(const PipelineConfig& config);

/// Runs every stage up to representative selection, stopping short of rewriting.
/// Stage failures are rethrown with the stage name prefixed.
PipelineResult analyze(std::string_view text, const PipelineConfig& config, resolver::Backend& backend,
                       representative::Tagger& tagger);

/// analyze() followed by edit planning and application.
PipelineResult rewrite_document(std::string_view text, const PipelineConfig& config, resolver::Backend& backend,
                                representative::Tagger& tagger);

/// Convenience overload using the builtin resolver and tagger.
PipelineResult rewrite_document(std::string_view text, const PipelineConfig& config);

/// Debug dump of every intermediate stage as JSON with sorted keys.
std::string inspect_json(const PipelineResult& result, int indent = 2);

/// JSON sidecar describing a rewrite's edits along with its offset map.
std::string rewrite_sidecar_json(const PipelineResult& result, int indent = 2);

} // namespace lqca
