#include "lqca/segmenter.hpp"

#include "lqca/text.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace lqca::segmenter {
namespace {

constexpr std::string_view kAbbreviations[] = {
    "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "e.g.", "i.e.", "etc.", "vs.", "Fig.", "Eq.", "No.", "U.S.",
};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }

std::size_t skip_space(std::string_view text, std::size_t i) {
    while (i < text.size() && text::is_space(text[i])) {
        ++i;
    }
    return i;
}

// The whitespace-delimited word that ends at `end`, minus opening punctuation.
std::string_view word_before(std::string_view text, std::size_t end) {
    std::size_t begin = end;
    while (begin > 0 && !text::is_space(text[begin - 1])) {
        --begin;
    }
    while (begin < end && (text[begin] == '(' || text[begin] == '[' || text[begin] == '"' ||
                           text[begin] == '\'')) {
        ++begin;
    }
    return text.substr(begin, end - begin);
}

SentenceSpan make_span(std::string_view text, std::size_t index, std::size_t start, std::size_t end) {
    return {index, start, end, text::count_tokens(text.substr(start, end - start)), false, index};
}

} // namespace

bool is_abbreviation(std::string_view word) {
    return std::find(std::begin(kAbbreviations), std::end(kAbbreviations), word) != std::end(kAbbreviations);
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
    std::vector<SentenceSpan> out;
    const std::size_t n = text.size();
    std::size_t pos = skip_space(text, 0);
    while (pos < n) {
        const std::size_t start = pos;
        std::size_t end = n;
        std::size_t i = pos;
        bool closed = false;
        while (i < n) {
            if (!is_terminator(text[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < n && is_terminator(text[j])) {
                ++j;
            }
            std::size_t k = j;
            while (k < n && is_closer(text[k])) {
                ++k;
            }
            if (k == n || text::is_space(text[k])) {
                const bool single_period = (j - i == 1 && text[i] == '.' && k == j);
                if (!(single_period && is_abbreviation(word_before(text, j)))) {
                    end = k;
                    closed = true;
                    break;
                }
            }
            i = k;
        }
        if (!closed) {
            while (end > start && text::is_space(text[end - 1])) {
                --end;
            }
        }
        out.push_back(make_span(text, out.size(), start, end));
        pos = skip_space(text, end);
    }
    return out;
}

std::vector<SentenceSpan> split_oversized(std::string_view text, std::span<const SentenceSpan> sentences,
                                          std::size_t max_tokens) {
    if (max_tokens == 0) {
        throw std::invalid_argument("token budget must be at least 1");
    }
    std::vector<SentenceSpan> units;
    units.reserve(sentences.size());
    for (const auto& sentence : sentences) {
        if (sentence.token_count <= max_tokens) {
            auto unit = sentence;
            unit.index = units.size();
            units.push_back(unit);
            continue;
        }
        auto tokens = text::tokenize(text.substr(sentence.start, sentence.end - sentence.start));
        for (std::size_t first = 0; first < tokens.size(); first += max_tokens) {
            const std::size_t last = std::min(tokens.size(), first + max_tokens) - 1;
            SentenceSpan piece;
            piece.index = units.size();
            piece.start = sentence.start + tokens[first].start;
            piece.end = sentence.start + tokens[last].end;
            piece.token_count = last - first + 1;
            piece.forced_split = true;
            piece.source_sentence = sentence.source_sentence;
            units.push_back(piece);
        }
    }
    return units;
}

std::vector<Chunk> chunk_document(std::span<const SentenceSpan> units, const ChunkConfig& config,
                                  std::size_t document_size) {
    const std::size_t budget = config.max_tokens;
    if (budget == 0) {
        throw std::invalid_argument("token budget must be at least 1");
    }
    std::vector<Chunk> chunks;
    if (units.empty()) {
        return chunks;
    }
    std::vector<std::size_t> token_start(units.size() + 1, 0);
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].token_count > budget) {
            throw std::invalid_argument("unit " + std::to_string(i) + " exceeds the token budget");
        }
        token_start[i + 1] = token_start[i] + units[i].token_count;
    }

    const std::size_t stride = std::max<std::size_t>(1, budget / 2);
    std::size_t first = 0;
    while (true) {
        std::size_t last = first;
        std::size_t tokens = units[first].token_count;
        while (last + 1 < units.size() && tokens + units[last + 1].token_count <= budget) {
            ++last;
            tokens += units[last].token_count;
        }

        Chunk chunk;
        chunk.index = chunks.size();
        chunk.first_unit = first;
        chunk.last_unit = last;
        chunk.start = chunks.empty() ? 0 : units[first].start;
        chunk.end = last + 1 < units.size() ? units[last + 1].start : document_size;
        chunk.token_start = token_start[first];
        chunk.token_count = tokens;
        chunk.hard_split = std::any_of(units.begin() + static_cast<std::ptrdiff_t>(first),
                                       units.begin() + static_cast<std::ptrdiff_t>(last) + 1,
                                       [](const SentenceSpan& u) { return u.forced_split; });
        chunks.push_back(chunk);

        if (last + 1 == units.size()) {
            break;
        }
        if (config.mode == ChunkMode::non_overlap) {
            first = last + 1;
            continue;
        }
        // Next window opens at the first unit at or past the stride mark, but
        // never beyond the unit right after this window.
        const std::size_t target = token_start[first] + stride;
        auto it = std::lower_bound(token_start.begin() + static_cast<std::ptrdiff_t>(first) + 1,
                                   token_start.end() - 1, target);
        const auto next = static_cast<std::size_t>(it - token_start.begin());
        first = std::min(next, last + 1);
    }
    return chunks;
}

Segmentation segment(std::string_view text, const ChunkConfig& config) {
    Segmentation seg;
    seg.sentences = split_sentences(text);
    seg.units = split_oversized(text, seg.sentences, config.max_tokens);
    seg.chunks = chunk_document(seg.units, config, text.size());
    return seg;
}

} // namespace lqca::segmenter
