#include "lqca/representative.hpp"

#include "lqca/errors.hpp"
#include "lqca/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>

namespace lqca::representative {

using nlohmann::json;

namespace {

constexpr std::string_view kPronouns[] = {
    "he",      "she",     "it",    "they",   "him",   "her",    "them",   "his",     "hers",
    "its",     "their",   "theirs", "i",     "you",   "we",     "me",     "us",      "this",
    "that",    "these",   "those", "who",    "whom",  "which",  "himself", "herself", "itself",
    "themselves", "myself", "yourself", "ourselves",
};

} // namespace

bool is_pronoun_word(std::string_view word) {
    if (word.empty() || word.size() > 10) {
        return false;
    }
    const auto folded = text::casefold(word);
    return std::find(std::begin(kPronouns), std::end(kPronouns), folded) != std::end(kPronouns);
}

std::vector<TaggedToken> tag_pronouns(std::string_view text) {
    std::vector<TaggedToken> out;
    for (const auto& tok : text::tokenize(text)) {
        const bool pron =
            tok.kind == text::TokenKind::word && is_pronoun_word(text.substr(tok.start, tok.size()));
        out.push_back({tok.start, tok.end, pron ? PosTag::pron : PosTag::other});
    }
    return out;
}

WireTagger::WireTagger(WireTaggerConfig config)
    : config_(std::move(config)), endpoint_(http::Endpoint::parse(config_.endpoint)) {}

std::vector<TaggedToken> WireTagger::parse_response(const std::string& body, std::string_view text) {
    try {
        const json parsed = json::parse(body);
        const text::Utf8Index index(text);
        std::vector<TaggedToken> out;
        for (const auto& tok : parsed.at("tokens")) {
            const auto start = tok.at("start").get<long long>();
            const auto end = tok.at("end").get<long long>();
            if (start < 0 || end <= start || end > static_cast<long long>(index.codepoint_count())) {
                throw std::out_of_range("token span out of range");
            }
            out.push_back({index.to_byte(static_cast<std::size_t>(start)), index.to_byte(static_cast<std::size_t>(end)),
                           tok.at("pos").get<std::string>() == "PRON" ? PosTag::pron : PosTag::other});
        }
        std::sort(out.begin(), out.end(),
                  [](const TaggedToken& a, const TaggedToken& b) { return a.start < b.start; });
        return out;
    } catch (const std::exception& e) {
        throw TransportError(std::string("malformed /tag response: ") + e.what());
    }
}

std::vector<TaggedToken> WireTagger::tag(std::string_view text) {
    http::RequestOptions options;
    options.timeout = config_.timeout;
    options.retry = config_.retry;
    const auto body = http::post_json(endpoint_, "/tag", json{{"text", std::string(text)}}.dump(), options);
    return parse_response(body, text);
}

bool is_pronoun_mention(std::size_t start, std::size_t end, std::span<const TaggedToken> tags) {
    // First token that ends after `start`; tokens are sorted and disjoint.
    auto it = std::upper_bound(tags.begin(), tags.end(), start,
                               [](std::size_t pos, const TaggedToken& t) { return pos < t.end; });
    for (; it != tags.end() && it->start < end; ++it) {
        if (it->pos == PosTag::pron) {
            return true;
        }
    }
    return false;
}

std::vector<SurfaceStat> surface_stats(const merge::GlobalCluster& cluster, std::span<const merge::GlobalMention> mentions,
                                       std::span<const TaggedToken> tags) {
    std::vector<SurfaceStat> stats;
    std::map<std::string, std::size_t> slot;
    std::vector<merge::MentionId> members = cluster.members;
    std::sort(members.begin(), members.end(), [&](merge::MentionId x, merge::MentionId y) {
        return std::tie(mentions[x].start, mentions[x].end) < std::tie(mentions[y].start, mentions[y].end);
    });
    for (auto id : members) {
        const auto& m = mentions[id];
        const bool pron = is_pronoun_mention(m.start, m.end, tags);
        auto key = text::normalize_surface(m.surface);
        auto [it, inserted] = slot.emplace(key, stats.size());
        if (inserted) {
            stats.push_back({std::move(key), 0, m.start, id, pron});
        }
        auto& stat = stats[it->second];
        ++stat.count;
        stat.is_pronoun = stat.is_pronoun || pron;
    }
    return stats;
}

std::optional<merge::MentionId> select_representative(const merge::GlobalCluster& cluster,
                                                      std::span<const merge::GlobalMention> mentions,
                                                      std::span<const TaggedToken> tags) {
    const auto stats = surface_stats(cluster, mentions, tags);
    const SurfaceStat* best = nullptr;
    for (const auto& stat : stats) {
        if (stat.is_pronoun) {
            continue;
        }
        // Stats arrive in first-appearance order, so strict > keeps the earliest on ties.
        if (best == nullptr || stat.count > best->count) {
            best = &stat;
        }
    }
    return best ? std::optional<merge::MentionId>(best->first_mention) : std::nullopt;
}

void assign_representatives(std::vector<merge::GlobalCluster>& clusters, std::span<const merge::GlobalMention> mentions,
                            std::span<const TaggedToken> tags) {
    for (auto& cluster : clusters) {
        cluster.representative = select_representative(cluster, mentions, tags);
    }
}

} // namespace lqca::representative
