#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Character-level helpers shared by every stage. Offsets are UTF-8 byte
// offsets into the owning string; code points only appear at wire boundaries.
namespace lqca::text {

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// ASCII punctuation only; bytes >= 0x80 count as word characters.
bool is_punct(char c) noexcept;

inline bool is_upper(char c) noexcept { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) noexcept { return c >= 'a' && c <= 'z'; }

enum class TokenKind { word, punct };

struct Token {
    std::size_t start = 0;
    std::size_t end = 0;
    TokenKind kind = TokenKind::word;

    std::size_t size() const noexcept { return end - start; }
};

/// Splits on whitespace, then splits each word's leading and trailing
/// punctuation runs off as separate tokens. `"Hello,"` yields three tokens.
std::vector<Token> tokenize(std::string_view text);

std::size_t count_tokens(std::string_view text);

std::string casefold(std::string_view s);

/// Case-folded copy with the ends trimmed and whitespace runs collapsed.
std::string normalize_surface(std::string_view s);

/// Maps between byte offsets and code-point offsets of one UTF-8 string.
class Utf8Index {
public:
    explicit Utf8Index(std::string_view text);

    std::size_t codepoint_count() const noexcept { return byte_of_cp_.size() - 1; }
    std::size_t byte_size() const noexcept { return byte_of_cp_.back(); }

    // cp may equal codepoint_count() (one-past-the-end).
    std::size_t to_byte(std::size_t cp) const;
    // byte must sit on a code-point boundary.
    std::size_t to_codepoint(std::size_t byte) const;
    bool is_boundary(std::size_t byte) const;

private:
    std::vector<std::size_t> byte_of_cp_;
};

} // namespace lqca::text
