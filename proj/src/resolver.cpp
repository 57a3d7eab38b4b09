#include "lqca/resolver.hpp"

#include "lqca/errors.hpp"
#include "lqca/representative.hpp"
#include "lqca/segmenter.hpp"
#include "lqca/text.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>

namespace lqca::resolver {

using nlohmann::json;

namespace {

// Words that are capitalized only because they open a sentence.
constexpr std::string_view kFunctionWords[] = {
    "a",       "an",     "the",      "and",    "but",       "or",      "nor",     "so",     "yet",
    "for",     "then",   "when",     "while",  "after",     "before",  "although", "though", "because",
    "since",   "if",     "unless",   "until",  "in",        "on",      "at",      "to",     "from",
    "with",    "without", "by",      "of",     "as",        "during",  "however", "meanwhile", "later",
    "finally", "also",   "still",    "there",  "here",      "now",     "once",    "soon",   "today",
    "yesterday", "tomorrow", "every", "each",  "some",      "many",    "all",     "no",     "not",
    "both",    "where",  "what",     "why",    "how",       "my",      "our",     "your",   "next",
};

bool is_function_word(std::string_view folded) {
    return std::find(std::begin(kFunctionWords), std::end(kFunctionWords), folded) != std::end(kFunctionWords);
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent_[std::max(a, b)] = std::min(a, b);
        }
    }

private:
    std::vector<std::size_t> parent_;
};

struct RawMention {
    std::size_t start;
    std::size_t end;
    bool pronoun;
};

std::vector<RawMention> detect_mentions(std::string_view text) {
    const auto tokens = text::tokenize(text);
    const auto sentences = segmenter::split_sentences(text);

    std::set<std::size_t> sentence_initial;
    {
        std::size_t s = 0;
        for (std::size_t i = 0; i < tokens.size() && s < sentences.size(); ++i) {
            while (s < sentences.size() && sentences[s].end <= tokens[i].start) {
                ++s;
            }
            if (s < sentences.size() && tokens[i].kind == text::TokenKind::word && tokens[i].start >= sentences[s].start) {
                sentence_initial.insert(i);
                ++s;
            }
        }
    }

    std::vector<RawMention> mentions;
    bool open = false;
    std::size_t run_start = 0;
    std::size_t run_end = 0;
    std::size_t last_tok = 0;
    auto close = [&] {
        if (open) {
            mentions.push_back({run_start, run_end, false});
            open = false;
        }
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        const std::string_view word = text.substr(tok.start, tok.size());
        const bool contiguous = open && last_tok + 1 == i;

        if (tok.kind == text::TokenKind::punct) {
            const auto& prev = tokens[i - (i > 0 ? 1 : 0)];
            const bool abbreviation_period = contiguous && word == "." && prev.kind == text::TokenKind::word &&
                                             prev.end == tok.start &&
                                             segmenter::is_abbreviation(text.substr(prev.start, tok.end - prev.start));
            if (abbreviation_period) {
                run_end = tok.end;
                last_tok = i;
            } else {
                close();
            }
            continue;
        }

        if (representative::is_pronoun_word(word)) {
            close();
            mentions.push_back({tok.start, tok.end, true});
            continue;
        }
        const bool capitalized = text::is_upper(word.front()) &&
                                 !(sentence_initial.count(i) != 0 && is_function_word(text::casefold(word)));
        if (!capitalized) {
            close();
            continue;
        }
        if (contiguous) {
            run_end = tok.end;
        } else {
            close();
            open = true;
            run_start = tok.start;
            run_end = tok.end;
        }
        last_tok = i;
    }
    close();

    std::sort(mentions.begin(), mentions.end(),
              [](const RawMention& a, const RawMention& b) { return std::tie(a.start, a.end) < std::tie(b.start, b.end); });
    return mentions;
}

// Mentions from code-point spans; spans that do not fit are left empty so that
// normalize() drops them.
LocalClustering from_codepoint_spans(std::string_view chunk_text, std::size_t chunk_index,
                                     const std::vector<std::pair<long long, long long>>& spans,
                                     std::vector<std::vector<std::size_t>> clusters) {
    const text::Utf8Index index(chunk_text);
    const auto limit = static_cast<long long>(index.codepoint_count());
    LocalClustering out;
    out.chunk_index = chunk_index;
    out.mentions.reserve(spans.size());
    for (const auto& [start, end] : spans) {
        if (start < 0 || end <= start || end > limit) {
            out.mentions.push_back({0, 0, {}});
            continue;
        }
        out.mentions.push_back(
            {index.to_byte(static_cast<std::size_t>(start)), index.to_byte(static_cast<std::size_t>(end)), {}});
    }
    out.clusters = std::move(clusters);
    return out;
}

std::vector<std::vector<std::size_t>> parse_clusters(const json& value) {
    std::vector<std::vector<std::size_t>> clusters;
    if (!value.is_array()) {
        throw std::invalid_argument("clusters is not an array");
    }
    for (const auto& cluster : value) {
        std::vector<std::size_t> members;
        for (const auto& idx : cluster) {
            if (!idx.is_number_integer() || idx.get<long long>() < 0) {
                throw std::invalid_argument("cluster member is not a non-negative integer");
            }
            members.push_back(idx.get<std::size_t>());
        }
        clusters.push_back(std::move(members));
    }
    return clusters;
}

} // namespace

LocalClustering builtin_resolve(std::string_view chunk_text, std::size_t chunk_index) {
    const auto raw = detect_mentions(chunk_text);
    LocalClustering out;
    out.chunk_index = chunk_index;
    for (const auto& m : raw) {
        out.mentions.push_back({m.start, m.end, std::string(chunk_text.substr(m.start, m.end - m.start))});
    }

    DisjointSets sets(raw.size());
    std::map<std::string, std::size_t> first_by_surface;
    std::optional<std::size_t> last_named;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].pronoun) {
            if (last_named) {
                sets.unite(*last_named, i);
            }
            continue;
        }
        auto [it, inserted] = first_by_surface.emplace(text::normalize_surface(out.mentions[i].surface), i);
        if (!inserted) {
            sets.unite(it->second, i);
        }
        last_named = i;
    }

    std::map<std::size_t, std::size_t> cluster_of_root;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] = cluster_of_root.emplace(sets.find(i), out.clusters.size());
        if (inserted) {
            out.clusters.emplace_back();
        }
        out.clusters[it->second].push_back(i);
    }
    return out;
}

std::size_t normalize(LocalClustering& clustering, std::string_view chunk_text) {
    const auto& in = clustering.mentions;
    // old index -> canonical span, or nullopt when invalid
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> span_of(in.size());
    std::set<std::pair<std::size_t, std::size_t>> spans;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto& m = in[i];
        const bool valid = m.start < m.end && m.end <= chunk_text.size() &&
                           (m.surface.empty() || chunk_text.substr(m.start, m.end - m.start) == m.surface);
        if (!valid) {
            ++dropped;
            continue;
        }
        span_of[i] = {m.start, m.end};
        spans.insert(*span_of[i]);
    }

    std::vector<LocalMention> mentions;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index_of;
    for (const auto& span : spans) {
        index_of.emplace(span, mentions.size());
        mentions.push_back(
            {span.first, span.second, std::string(chunk_text.substr(span.first, span.second - span.first))});
    }

    std::vector<bool> claimed(mentions.size(), false);
    std::vector<std::vector<std::size_t>> clusters;
    for (const auto& cluster : clustering.clusters) {
        std::vector<std::size_t> members;
        for (std::size_t old : cluster) {
            if (old >= span_of.size() || !span_of[old]) {
                continue;
            }
            const std::size_t idx = index_of.at(*span_of[old]);
            if (claimed[idx]) {
                continue;
            }
            claimed[idx] = true;
            members.push_back(idx);
        }
        if (!members.empty()) {
            std::sort(members.begin(), members.end());
            clusters.push_back(std::move(members));
        }
    }
    for (std::size_t i = 0; i < mentions.size(); ++i) {
        if (!claimed[i]) {
            clusters.push_back({i});
        }
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    clustering.mentions = std::move(mentions);
    clustering.clusters = std::move(clusters);
    return dropped;
}

WireBackend::WireBackend(WireConfig config)
    : config_(std::move(config)), endpoint_(http::Endpoint::parse(config_.endpoint)) {}

std::string WireBackend::request_body(std::string_view chunk_text, std::size_t chunk_index) {
    return json{{"chunk_id", chunk_index}, {"text", std::string(chunk_text)}}.dump();
}

LocalClustering WireBackend::parse_response(const std::string& body, std::string_view chunk_text,
                                            std::size_t chunk_index) {
    try {
        const json parsed = json::parse(body);
        std::vector<std::pair<long long, long long>> spans;
        for (const auto& m : parsed.at("mentions")) {
            spans.emplace_back(m.at("start").get<long long>(), m.at("end").get<long long>());
        }
        auto out = from_codepoint_spans(chunk_text, chunk_index, spans, parse_clusters(parsed.at("clusters")));
        if (const auto dropped = normalize(out, chunk_text); dropped > 0) {
            spdlog::warn("chunk {}: resolver returned {} mention(s) outside the text", chunk_index, dropped);
        }
        return out;
    } catch (const std::exception& e) {
        throw TransportError(std::string("malformed /resolve response: ") + e.what(), chunk_index);
    }
}

LocalClustering WireBackend::resolve(std::string_view chunk_text, std::size_t chunk_index) {
    http::RequestOptions options;
    options.timeout = config_.timeout;
    options.retry = config_.retry;
    std::string body;
    try {
        body = http::post_json(endpoint_, "/resolve", request_body(chunk_text, chunk_index), options);
    } catch (const TransportError& e) {
        throw TransportError(e.what(), chunk_index);
    }
    return parse_response(body, chunk_text, chunk_index);
}

std::vector<qa::ChatMessage> llm_resolve_prompt(std::string_view chunk_text) {
    std::string user =
        "Read the passage below and perform coreference resolution on it.\n"
        "Find every mention, meaning pronouns, nouns, noun phrases and modifiers that refer to an entity, "
        "and group the mentions that refer to the same entity.\n"
        "Reply with a single JSON object and nothing else, in this shape:\n"
        "{\"mentions\": [{\"start\": 0, \"end\": 5, \"text\": \"Alice\"}], \"clusters\": [[0, 3]]}\n"
        "\"start\" and \"end\" are character offsets into the passage (end exclusive), \"text\" is the exact "
        "mention text, and each cluster lists indices into \"mentions\".\n\n"
        "Passage:\n";
    user.append(chunk_text);
    return {{"user", std::move(user)}};
}

LocalClustering parse_llm_reply(std::string_view reply, std::string_view chunk_text, std::size_t chunk_index) {
    LocalClustering empty;
    empty.chunk_index = chunk_index;

    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        spdlog::warn("chunk {}: no JSON object in model reply; treating chunk as unresolved", chunk_index);
        return empty;
    }
    try {
        const json parsed = json::parse(reply.substr(open, close - open + 1));
        const text::Utf8Index index(chunk_text);
        std::vector<std::pair<long long, long long>> spans;
        for (const auto& m : parsed.at("mentions")) {
            long long start = m.at("start").get<long long>();
            long long end = m.at("end").get<long long>();
            if (m.contains("text") && start >= 0 && end > start &&
                end <= static_cast<long long>(index.codepoint_count())) {
                const auto b0 = index.to_byte(static_cast<std::size_t>(start));
                const auto b1 = index.to_byte(static_cast<std::size_t>(end));
                if (chunk_text.substr(b0, b1 - b0) != m["text"].get<std::string>()) {
                    start = end = -1;
                }
            }
            spans.emplace_back(start, end);
        }
        auto out = from_codepoint_spans(chunk_text, chunk_index, spans, parse_clusters(parsed.at("clusters")));
        if (const auto dropped = normalize(out, chunk_text); dropped > 0) {
            spdlog::warn("chunk {}: dropped {} invalid mention span(s) from model reply", chunk_index, dropped);
        }
        return out;
    } catch (const std::exception& e) {
        spdlog::warn("chunk {}: unparsable model reply ({}); treating chunk as unresolved", chunk_index, e.what());
        return empty;
    }
}

LocalClustering llm_resolve(std::string_view chunk_text, qa::ChatModel& model, std::size_t chunk_index) {
    const auto prompt = llm_resolve_prompt(chunk_text);
    std::string reply;
    try {
        reply = model.complete(prompt);
    } catch (const TransportError& e) {
        throw TransportError(e.what(), chunk_index);
    } catch (const ParseError& e) {
        spdlog::warn("chunk {}: {}; treating chunk as unresolved", chunk_index, e.what());
    }
    return parse_llm_reply(reply, chunk_text, chunk_index);
}

LocalClustering LlmBackend::resolve(std::string_view chunk_text, std::size_t chunk_index) {
    return llm_resolve(chunk_text, *model_, chunk_index);
}

LocalClustering resolve_chunk(std::string_view chunk_text, std::size_t chunk_index, Backend& backend) {
    LocalClustering out;
    try {
        out = backend.resolve(chunk_text, chunk_index);
    } catch (const TransportError& e) {
        if (e.chunk_index()) {
            throw;
        }
        throw TransportError(e.what(), chunk_index);
    }
    out.chunk_index = chunk_index;
    normalize(out, chunk_text);
    return out;
}

} // namespace lqca::resolver
