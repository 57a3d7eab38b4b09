#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lqca::segmenter {

struct SentenceSpan {
    std::size_t index = 0;
    std::size_t start = 0; // inclusive byte offset
    std::size_t end = 0;   // exclusive byte offset
    std::size_t token_count = 0;
    // Set on pseudo-sentences produced by cutting an oversized sentence.
    bool forced_split = false;
    // Index of the sentence this span was cut from (== index unless forced_split).
    std::size_t source_sentence = 0;

    bool operator==(const SentenceSpan&) const = default;
};

enum class ChunkMode { sliding, non_overlap };

struct ChunkConfig {
    std::size_t max_tokens = 512;
    ChunkMode mode = ChunkMode::sliding;
};

/// A sentence-aligned window. `first_unit`/`last_unit` index the unit list the
/// chunk was built from (sentences, after oversized ones are cut). The byte
/// range also absorbs the whitespace that separates it from the next chunk, so
/// the chunks of a document cover every byte.
struct Chunk {
    std::size_t index = 0;
    std::size_t first_unit = 0;
    std::size_t last_unit = 0;
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t token_start = 0; // document token index of the first unit
    std::size_t token_count = 0;
    bool hard_split = false;

    bool operator==(const Chunk&) const = default;
};

/// Sentence-final punctuation followed by whitespace or end of text closes a
/// sentence, except after a known abbreviation ("Dr.", "e.g.", "U.S." ...).
std::vector<SentenceSpan> split_sentences(std::string_view text);

bool is_abbreviation(std::string_view word);

/// Cuts every sentence longer than `max_tokens` into consecutive pieces of at
/// most `max_tokens` tokens. Indices are renumbered.
std::vector<SentenceSpan> split_oversized(std::string_view text, std::span<const SentenceSpan> sentences,
                                          std::size_t max_tokens);

/// Greedy whole-sentence windows. Requires every unit to fit in the budget
/// (see split_oversized); `document_size` closes the last chunk.
std::vector<Chunk> chunk_document(std::span<const SentenceSpan> units, const ChunkConfig& config,
                                  std::size_t document_size);

struct Segmentation {
    std::vector<SentenceSpan> sentences;
    std::vector<SentenceSpan> units;
    std::vector<Chunk> chunks;
};

Segmentation segment(std::string_view text, const ChunkConfig& config);

inline std::string_view chunk_text(std::string_view text, const Chunk& chunk) {
    return text.substr(chunk.start, chunk.end - chunk.start);
}

} // namespace lqca::segmenter
