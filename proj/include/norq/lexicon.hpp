// lexicon.hpp -- word lists and the four presentation/exchange text metrics.
//
// Tone     (P - N) / (P + N), 0 when no sentiment words at all
// Uncert   uncertainty words / total words
// Forward  forward-looking terms / total words (multiword phrases supported)
// Read     Gunning fog: 0.4 * words/sentences + 100 * complex/words
//
// All counting runs on the shared tokenizer (norq/text.hpp).

#ifndef NORQ_LEXICON_HPP_
#define NORQ_LEXICON_HPP_

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "norq/corpus.hpp"
#include "norq/errors.hpp"
#include "norq/text.hpp"

namespace norq {

// A phrase is a sequence of tokens; single words are 1-token phrases.
struct TermSet {
    std::unordered_set<std::string> words;
    std::vector<std::vector<std::string>> phrases;  // multiword only

    bool empty() const { return words.empty() && phrases.empty(); }

    void add(const std::string& raw) {
        auto tokens = tokenize(raw);
        if (tokens.empty()) return;
        if (tokens.size() == 1) words.insert(tokens[0]);
        else phrases.push_back(std::move(tokens));
    }
};

struct WordLists {
    TermSet positive;
    TermSet negative;
    TermSet uncertainty;
    TermSet forward_looking;
};

// One term per line, '#' starts a comment, multiword phrases allowed.
inline TermSet load_term_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadWordList("cannot open word list " + path);
    TermSet set;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string term = trim(line);
        if (term.empty()) continue;
        for (char c : term)
            if (!is_alpha(c) && c != ' ' && c != '-')
                throw BadWordList(path + ": invalid term '" + term + "'");
        set.add(term);
    }
    return set;
}

inline WordLists load_word_lists(const std::string& dir) {
    WordLists lists;
    lists.positive = load_term_file(dir + "/positive.txt");
    lists.negative = load_term_file(dir + "/negative.txt");
    lists.uncertainty = load_term_file(dir + "/uncertainty.txt");
    lists.forward_looking = load_term_file(dir + "/forward.txt");
    for (const std::string& w : lists.positive.words)
        if (lists.negative.words.count(w))
            throw BadWordList("term '" + w + "' appears in both positive and negative lists");
    return lists;
}

struct TextMetrics {
    double tone = 0.0;     // [-1, 1]
    double uncert = 0.0;   // [0, 1]
    double forward = 0.0;  // [0, 1]
    double fog = 0.0;      // >= 0
    std::size_t word_count = 0;
};

namespace detail {

inline std::size_t count_words(const std::vector<std::string>& tokens, const TermSet& set) {
    std::size_t n = 0;
    for (const std::string& t : tokens)
        if (set.words.count(t)) ++n;
    return n;
}

// Phrase occurrences as contiguous token runs; overlapping matches of the
// same phrase count once per start position.
inline std::size_t count_phrases(const std::vector<std::string>& tokens, const TermSet& set) {
    std::size_t n = 0;
    for (const auto& phrase : set.phrases) {
        if (phrase.size() > tokens.size()) continue;
        for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
            if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + i)) ++n;
        }
    }
    return n;
}

inline std::size_t count_terms(const std::vector<std::string>& tokens, const TermSet& set) {
    return count_words(tokens, set) + count_phrases(tokens, set);
}

}  // namespace detail

inline double tone(std::string_view text, const WordLists& lists) {
    const auto tokens = tokenize(text);
    const double p = static_cast<double>(detail::count_terms(tokens, lists.positive));
    const double n = static_cast<double>(detail::count_terms(tokens, lists.negative));
    if (p + n == 0.0) return 0.0;
    return (p - n) / (p + n);
}

inline double lexical_ratio(std::string_view text, const TermSet& terms) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw EmptyText("lexical_ratio on empty text");
    return static_cast<double>(detail::count_terms(tokens, terms)) /
           static_cast<double>(tokens.size());
}

// complex_syllables: minimum syllable count for a complex word. 3 is the
// standard Gunning rule; 4 gives the strict "more than 3" reading.
inline double fog_index(std::string_view text, int complex_syllables = 3) {
    const auto chunks = word_chunks(text);
    std::size_t words = 0;
    std::size_t complex_words = 0;
    for (const WordChunk& c : chunks) {
        words += c.parts;
        // hyphen compounds never count as complex
        if (!c.hyphenated() && syllable_count(c.upper) >= complex_syllables)
            ++complex_words;
    }
    if (words == 0) throw EmptyText("fog_index on empty text");
    std::size_t sentences = sentence_count(text);
    if (sentences == 0) sentences = 1;  // unterminated text reads as one sentence
    return 0.4 * (static_cast<double>(words) / static_cast<double>(sentences)) +
           100.0 * (static_cast<double>(complex_words) / static_cast<double>(words));
}

inline TextMetrics text_metrics(std::string_view text, const WordLists& lists,
                                int complex_syllables = 3) {
    TextMetrics m;
    const auto tokens = tokenize(text);
    m.word_count = tokens.size();
    if (tokens.empty()) throw EmptyText("text_metrics on empty text");
    const double p = static_cast<double>(detail::count_terms(tokens, lists.positive));
    const double n = static_cast<double>(detail::count_terms(tokens, lists.negative));
    m.tone = (p + n == 0.0) ? 0.0 : (p - n) / (p + n);
    m.uncert = static_cast<double>(detail::count_terms(tokens, lists.uncertainty)) /
               static_cast<double>(tokens.size());
    m.forward = static_cast<double>(detail::count_terms(tokens, lists.forward_looking)) /
                static_cast<double>(tokens.size());
    m.fog = fog_index(text, complex_syllables);
    return m;
}

enum class ExchangeScope { AnalystTurns, AllTurns };

// Conversation-level metrics. Default scope is the analyst question turns;
// AllTurns is available behind a flag.
inline TextMetrics exchange_metrics(const QAExchange& x, const WordLists& lists,
                                    ExchangeScope scope = ExchangeScope::AnalystTurns,
                                    int complex_syllables = 3) {
    std::string text;
    for (const Turn& t : x.turns) {
        if (scope == ExchangeScope::AnalystTurns && t.speaker_role != SpeakerRole::Analyst)
            continue;
        if (!text.empty()) text += " ";
        text += t.text;
    }
    if (text.empty()) {
        TextMetrics m;  // analyst said nothing measurable; all-zero row
        return m;
    }
    return text_metrics(text, lists, complex_syllables);
}

}  // namespace norq

#endif  // NORQ_LEXICON_HPP_
