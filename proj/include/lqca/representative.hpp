#pragma once

#include "lqca/http.hpp"
#include "lqca/merge.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lqca::representative {

enum class PosTag { pron, other };

struct TaggedToken {
    std::size_t start = 0;
    std::size_t end = 0;
    PosTag pos = PosTag::other;

    bool operator==(const TaggedToken&) const = default;
};

/// Case-insensitive lookup in the fixed pronoun lexicon.
bool is_pronoun_word(std::string_view word);

/// Lexicon tagger: every token of the shared tokenizer, PRON on a lexicon hit.
std::vector<TaggedToken> tag_pronouns(std::string_view text);

class Tagger {
public:
    virtual ~Tagger() = default;
    virtual std::vector<TaggedToken> tag(std::string_view text) = 0;
};

class BuiltinTagger final : public Tagger {
public:
    std::vector<TaggedToken> tag(std::string_view text) override { return tag_pronouns(text); }
};

struct WireTaggerConfig {
    std::string endpoint = "http://127.0.0.1:8765";
    std::chrono::milliseconds timeout{30000};
    http::RetryPolicy retry;
};

/// Client for `POST /tag`. Tags other than "PRON" map to PosTag::other.
class WireTagger final : public Tagger {
public:
    explicit WireTagger(WireTaggerConfig config);
    std::vector<TaggedToken> tag(std::string_view text) override;

    static std::vector<TaggedToken> parse_response(const std::string& body, std::string_view text);

private:
    WireTaggerConfig config_;
    http::Endpoint endpoint_;
};

/// True iff any token overlapping [start, end) is PRON. `tags` must be sorted.
bool is_pronoun_mention(std::size_t start, std::size_t end, std::span<const TaggedToken> tags);

struct SurfaceStat {
    std::string surface; // normalized
    std::size_t count = 0;
    std::size_t first_position = 0;
    merge::MentionId first_mention = 0;
    bool is_pronoun = false;
};

/// Per-surface frequencies of a cluster, in order of first appearance.
std::vector<SurfaceStat> surface_stats(const merge::GlobalCluster& cluster, std::span<const merge::GlobalMention> mentions,
                                       std::span<const TaggedToken> tags);

/// Most frequent non-pronoun surface, earliest first occurrence on ties;
/// returns that surface's earliest mention. None for all-pronoun clusters.
std::optional<merge::MentionId> select_representative(const merge::GlobalCluster& cluster,
                                                      std::span<const merge::GlobalMention> mentions,
                                                      std::span<const TaggedToken> tags);

/// Fills `representative` on every cluster.
void assign_representatives(std::vector<merge::GlobalCluster>& clusters, std::span<const merge::GlobalMention> mentions,
                            std::span<const TaggedToken> tags);

} // namespace lqca::representative
