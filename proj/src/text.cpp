#include "lqca/text.hpp"

#include <algorithm>
#include <stdexcept>

namespace lqca::text {

bool is_punct(char c) noexcept {
    auto u = static_cast<unsigned char>(c);
    return (u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) || (u >= 0x5b && u <= 0x60) ||
           (u >= 0x7b && u <= 0x7e);
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) {
            ++i;
        }
        if (i == n) {
            break;
        }
        std::size_t word_end = i;
        while (word_end < n && !is_space(text[word_end])) {
            ++word_end;
        }

        std::size_t core_start = i;
        while (core_start < word_end && is_punct(text[core_start])) {
            ++core_start;
        }
        if (core_start == word_end) {
            // all punctuation, e.g. "--"
            tokens.push_back({i, word_end, TokenKind::punct});
            i = word_end;
            continue;
        }
        std::size_t core_end = word_end;
        while (core_end > core_start && is_punct(text[core_end - 1])) {
            --core_end;
        }
        if (core_start > i) {
            tokens.push_back({i, core_start, TokenKind::punct});
        }
        tokens.push_back({core_start, core_end, TokenKind::word});
        if (core_end < word_end) {
            tokens.push_back({core_end, word_end, TokenKind::punct});
        }
        i = word_end;
    }
    return tokens;
}

std::size_t count_tokens(std::string_view text) { return tokenize(text).size(); }

std::string casefold(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](char c) {
        return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
    });
    return out;
}

std::string normalize_surface(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c);
    }
    return out;
}

Utf8Index::Utf8Index(std::string_view text) {
    byte_of_cp_.reserve(text.size() + 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto u = static_cast<unsigned char>(text[i]);
        if ((u & 0xC0) != 0x80) {
            byte_of_cp_.push_back(i);
        }
    }
    byte_of_cp_.push_back(text.size());
}

std::size_t Utf8Index::to_byte(std::size_t cp) const {
    if (cp >= byte_of_cp_.size()) {
        throw std::out_of_range("code point offset " + std::to_string(cp) + " past end");
    }
    return byte_of_cp_[cp];
}

std::size_t Utf8Index::to_codepoint(std::size_t byte) const {
    auto it = std::lower_bound(byte_of_cp_.begin(), byte_of_cp_.end(), byte);
    if (it == byte_of_cp_.end() || *it != byte) {
        throw std::out_of_range("byte offset " + std::to_string(byte) + " is not a code point boundary");
    }
    return static_cast<std::size_t>(it - byte_of_cp_.begin());
}

bool Utf8Index::is_boundary(std::size_t byte) const {
    return std::binary_search(byte_of_cp_.begin(), byte_of_cp_.end(), byte);
}

} // namespace lqca::text
