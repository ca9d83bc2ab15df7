// text.hpp -- tokenization shared by the corpus and lexicon modules.
//
// One rule everywhere: a token is a maximal run of alphabetic characters,
// case-folded to upper case. Word counts, lexicon lookups, and readability
// all ride on this tokenizer so per-part counts add up to whole-document
// counts.

#ifndef NORQ_TEXT_HPP_
#define NORQ_TEXT_HPP_

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace norq {

inline bool is_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline char to_upper(char c) {
    return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

// Upper-cased alphabetic tokens; everything non-alphabetic separates.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (is_alpha(c)) {
            current.push_back(to_upper(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_alpha(c)) {
            if (!in_word) { ++n; in_word = true; }
        } else {
            in_word = false;
        }
    }
    return n;
}

// Number of sentence-terminator groups (. ! ?); consecutive terminators
// count once. Returns 0 for text with no terminator.
inline std::size_t sentence_count(std::string_view text) {
    std::size_t n = 0;
    bool in_terminator = false;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?') {
            if (!in_terminator) { ++n; in_terminator = true; }
        } else {
            in_terminator = false;
        }
    }
    return n;
}

// Vowel-group heuristic: maximal runs of AEIOUY count one each, a trailing
// 'E' is treated as silent and subtracted, minimum 1. Expects an upper-case
// alphabetic token.
inline int syllable_count(std::string_view word) {
    auto is_vowel = [](char c) {
        return c == 'A' || c == 'E' || c == 'I' || c == 'O' || c == 'U' || c == 'Y';
    };
    int groups = 0;
    bool in_group = false;
    for (char c : word) {
        if (is_vowel(c)) {
            if (!in_group) { ++groups; in_group = true; }
        } else {
            in_group = false;
        }
    }
    if (!word.empty() && word.back() == 'E') --groups;
    return groups < 1 ? 1 : groups;
}

// Hyphen-aware chunks for complex-word detection: a chunk is a maximal run
// of alphabetic characters and interior hyphens. "state-of-the-art" comes
// back as one chunk with parts=4. The plain tokenizer sees `parts` words in
// each chunk, so fog word totals stay consistent with word_count().
struct WordChunk {
    std::string upper;       // hyphens stripped, upper-cased
    std::size_t parts = 1;   // number of alphabetic runs joined by hyphens
    bool hyphenated() const { return parts > 1; }
};

inline std::vector<WordChunk> word_chunks(std::string_view text) {
    std::vector<WordChunk> chunks;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_alpha(text[i])) { ++i; continue; }
        WordChunk chunk;
        while (i < n) {
            if (is_alpha(text[i])) {
                chunk.upper.push_back(to_upper(text[i]));
                ++i;
            } else if (text[i] == '-' && i + 1 < n && is_alpha(text[i + 1]) &&
                       !chunk.upper.empty()) {
                ++chunk.parts;
                ++i;  // hyphen joins, is not kept
            } else {
                break;
            }
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

inline std::string normalize_ws(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) { out.push_back(' '); pending_space = false; }
            out.push_back(c);
        }
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string upper_copy(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = to_upper(c);
    return out;
}

}  // namespace norq

#endif  // NORQ_TEXT_HPP_
