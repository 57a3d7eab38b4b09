#pragma once

#include "lqca/chat.hpp"
#include "lqca/http.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace lqca::resolver {

/// Span relative to the chunk it was found in (byte offsets).
struct LocalMention {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string surface;

    bool operator==(const LocalMention&) const = default;
};

struct LocalClustering {
    std::size_t chunk_index = 0;
    std::vector<LocalMention> mentions; // sorted by (start, end), unique spans
    std::vector<std::vector<std::size_t>> clusters;

    bool operator==(const LocalClustering&) const = default;
};

/// Deterministic rule resolver.
///
/// Mentions are maximal runs of capitalized words plus lexicon pronouns. A run
/// never crosses punctuation, except the period of a listed abbreviation
/// ("Dr. Smith"). At sentence starts, common function words ("The", "When",
/// ...) do not count as capitalized. Clusters join non-pronoun mentions with
/// the same normalized surface, and attach each pronoun to the nearest
/// preceding non-pronoun mention, if any. Every mention lands in exactly one
/// cluster; clusters are ordered by their first mention.
LocalClustering builtin_resolve(std::string_view chunk_text, std::size_t chunk_index = 0);

/// Drops mentions whose span does not slice `chunk_text` and merges duplicate
/// spans. A mention claimed by two clusters stays with the first.
/// Mentions left in no cluster become singletons. Returns the number of
/// mentions dropped.
std::size_t normalize(LocalClustering& clustering, std::string_view chunk_text);

enum class BackendKind { builtin, wire, llm };

struct WireConfig {
    std::string endpoint = "http://127.0.0.1:8765";
    std::chrono::milliseconds timeout{30000};
    http::RetryPolicy retry;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual LocalClustering resolve(std::string_view chunk_text, std::size_t chunk_index) = 0;
    // False when calls must be serialized by the caller.
    virtual bool concurrent() const { return true; }
};

class BuiltinBackend final : public Backend {
public:
    LocalClustering resolve(std::string_view chunk_text, std::size_t chunk_index) override {
        return builtin_resolve(chunk_text, chunk_index);
    }
};

/// Client for `POST /resolve`; offsets on the wire are code points.
class WireBackend final : public Backend {
public:
    explicit WireBackend(WireConfig config);
    LocalClustering resolve(std::string_view chunk_text, std::size_t chunk_index) override;

    static std::string request_body(std::string_view chunk_text, std::size_t chunk_index);
    static LocalClustering parse_response(const std::string& body, std::string_view chunk_text,
                                          std::size_t chunk_index);

private:
    WireConfig config_;
    http::Endpoint endpoint_;
};

/// Asks a chat model for mentions and clusters as JSON.
class LlmBackend final : public Backend {
public:
    explicit LlmBackend(std::shared_ptr<qa::ChatModel> model) : model_(std::move(model)) {}
    LocalClustering resolve(std::string_view chunk_text, std::size_t chunk_index) override;

private:
    std::shared_ptr<qa::ChatModel> model_;
};

std::vector<qa::ChatMessage> llm_resolve_prompt(std::string_view chunk_text);

/// Parses a model reply (optionally wrapped in a ```json fence). Unparsable or
/// empty replies give zero mentions with a logged warning.
LocalClustering parse_llm_reply(std::string_view reply, std::string_view chunk_text, std::size_t chunk_index);

LocalClustering llm_resolve(std::string_view chunk_text, qa::ChatModel& model, std::size_t chunk_index = 0);

/// Single entry point over any backend; wire failures surface as
/// TransportError naming the chunk.
LocalClustering resolve_chunk(std::string_view chunk_text, std::size_t chunk_index, Backend& backend);

} // namespace lqca::resolver
