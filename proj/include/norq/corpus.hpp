// corpus.hpp -- transcript model, file parser, exchange segmentation, dedup.
//
// Input format (one transcript per file):
//
//   #id: T0001
//   #firm: F001
//   #quarter: 2020Q3
//   #version: 2
//   [PRESENTATION]
//   free text ...
//   [QA]
//   [Analyst][Jane Roe]: How did margins evolve?
//   [Manager][John Doe]: They improved across segments.
//
// Exchange boundaries: a new exchange starts when an analyst turn follows a
// manager turn and the analyst name differs from the previous analyst, or
// the operator intervened in between. Operator turns never enter exchanges
// but stay in the raw turn record.

#ifndef NORQ_CORPUS_HPP_
#define NORQ_CORPUS_HPP_

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "norq/csv.hpp"
#include "norq/dates.hpp"
#include "norq/errors.hpp"
#include "norq/text.hpp"

namespace norq {

enum class SpeakerRole { Analyst, Manager, Operator, Other };

inline std::string role_name(SpeakerRole role) {
    switch (role) {
        case SpeakerRole::Analyst: return "Analyst";
        case SpeakerRole::Manager: return "Manager";
        case SpeakerRole::Operator: return "Operator";
        default: return "Other";
    }
}

inline SpeakerRole role_from_label(std::string_view label) {
    const std::string u = upper_copy(trim(label));
    if (u == "ANALYST" || u == "ANALYSTS") return SpeakerRole::Analyst;
    if (u == "MANAGER" || u == "MANAGERS" || u == "MANAGEMENT" ||
        u == "EXECUTIVE" || u == "EXECUTIVES") return SpeakerRole::Manager;
    if (u == "OPERATOR" || u == "MODERATOR") return SpeakerRole::Operator;
    return SpeakerRole::Other;
}

struct Turn {
    SpeakerRole speaker_role = SpeakerRole::Other;
    std::string speaker_name;  // may be empty
    std::string text;          // whitespace-normalized, non-empty
};

struct QAExchange {
    std::string conver_id;  // transcript_id + "-" + order
    int order = 0;          // 1-based position within the call
    std::vector<Turn> turns;

    bool has_role(SpeakerRole role) const {
        return std::any_of(turns.begin(), turns.end(),
                           [role](const Turn& t) { return t.speaker_role == role; });
    }
};

struct Transcript {
    std::string transcript_id;
    std::string firm_id;
    Quarter fiscal_quarter;
    int version = 1;
    std::string presentation;
    std::vector<QAExchange> exchanges;
    std::vector<Turn> raw_turns;  // full Q&A record including operator turns
};

// --- word counts --------------------------------------------------------

inline std::size_t exchange_word_count(const QAExchange& x) {
    std::size_t n = 0;
    for (const Turn& t : x.turns) n += word_count(t.text);
    return n;
}

inline std::size_t transcript_word_count(const Transcript& t) {
    std::size_t n = word_count(t.presentation);
    for (const QAExchange& x : t.exchanges) n += exchange_word_count(x);
    return n;
}

// --- parsing ------------------------------------------------------------

namespace detail {

// "[Role][Name]: text" or "[Role]: text" -> turn. Returns nullopt for lines
// that carry no speaker tag.
inline std::optional<Turn> parse_turn_line(const std::string& line) {
    if (line.empty() || line[0] != '[') return std::nullopt;
    const std::size_t role_end = line.find(']');
    if (role_end == std::string::npos) return std::nullopt;
    Turn turn;
    turn.speaker_role = role_from_label(line.substr(1, role_end - 1));
    std::size_t pos = role_end + 1;
    if (pos < line.size() && line[pos] == '[') {
        const std::size_t name_end = line.find(']', pos);
        if (name_end == std::string::npos) return std::nullopt;
        turn.speaker_name = trim(line.substr(pos + 1, name_end - pos - 1));
        pos = name_end + 1;
    }
    if (pos >= line.size() || line[pos] != ':') return std::nullopt;
    turn.text = normalize_ws(line.substr(pos + 1));
    return turn;
}

}  // namespace detail

// Segments Q&A turns into exchanges. Used by parse_transcript; exposed so
// tests can drive the boundary rule directly.
inline std::vector<QAExchange> segment_exchanges(const std::vector<Turn>& qa_turns,
                                                 const std::string& transcript_id) {
    std::vector<QAExchange> exchanges;
    std::vector<Turn> current;
    std::string last_analyst_name;
    bool operator_intervened = false;
    bool last_was_manager = false;

    auto flush = [&]() {
        if (current.empty()) return;
        QAExchange x;
        x.turns = std::move(current);
        current.clear();
        // keep only exchanges with at least one analyst and one manager turn
        if (x.has_role(SpeakerRole::Analyst) && x.has_role(SpeakerRole::Manager))
            exchanges.push_back(std::move(x));
    };

    for (const Turn& turn : qa_turns) {
        if (turn.speaker_role == SpeakerRole::Operator) {
            operator_intervened = true;
            continue;
        }
        if (turn.speaker_role == SpeakerRole::Analyst) {
            const bool boundary =
                !current.empty() && last_was_manager &&
                (operator_intervened || turn.speaker_name != last_analyst_name);
            if (boundary) flush();
            last_analyst_name = turn.speaker_name;
            operator_intervened = false;
            current.push_back(turn);
            last_was_manager = false;
        } else {
            // Manager / Other: belongs to the open exchange; leading
            // manager chatter before any analyst question is dropped.
            if (current.empty()) continue;
            current.push_back(turn);
            last_was_manager = turn.speaker_role == SpeakerRole::Manager;
        }
    }
    flush();

    for (std::size_t i = 0; i < exchanges.size(); ++i) {
        exchanges[i].order = static_cast<int>(i) + 1;
        exchanges[i].conver_id = transcript_id + "-" + std::to_string(exchanges[i].order);
    }
    return exchanges;
}

inline Transcript parse_transcript(std::istream& in, const std::string& source_name = "<input>") {
    Transcript t;
    bool have_id = false, have_firm = false, have_quarter = false, have_version = false;
    enum class Section { Header, Presentation, QA } section = Section::Header;
    std::string presentation;
    std::vector<Turn> qa_turns;

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped == "[PRESENTATION]") { section = Section::Presentation; continue; }
        if (stripped == "[QA]") { section = Section::QA; continue; }

        switch (section) {
            case Section::Header: {
                if (stripped.empty()) continue;
                auto header_value = [&](std::string_view key) -> std::optional<std::string> {
                    if (stripped.rfind(key, 0) == 0)
                        return trim(stripped.substr(key.size()));
                    return std::nullopt;
                };
                if (auto v = header_value("#id:")) { t.transcript_id = *v; have_id = true; }
                else if (auto v = header_value("#firm:")) { t.firm_id = *v; have_firm = true; }
                else if (auto v = header_value("#quarter:")) {
                    try { t.fiscal_quarter = Quarter::parse(*v); }
                    catch (const Error&) { throw MalformedDocument(source_name + ": bad quarter '" + *v + "'"); }
                    have_quarter = true;
                }
                else if (auto v = header_value("#version:")) {
                    try { t.version = static_cast<int>(parse_long(*v)); }
                    catch (const Error&) { throw MalformedDocument(source_name + ": bad version '" + *v + "'"); }
                    have_version = true;
                }
                else throw MalformedDocument(source_name + ": unexpected header line '" + stripped + "'");
                break;
            }
            case Section::Presentation:
                if (!presentation.empty()) presentation += "\n";
                presentation += line;
                break;
            case Section::QA: {
                if (stripped.empty()) continue;
                auto turn = detail::parse_turn_line(stripped);
                if (!turn)
                    throw MalformedDocument(source_name + ": untagged speaker line '" +
                                            stripped.substr(0, 40) + "'");
                if (turn->text.empty())
                    throw MalformedDocument(source_name + ": empty turn text");
                qa_turns.push_back(std::move(*turn));
                break;
            }
        }
    }

    if (!have_id) throw MalformedDocument(source_name + ": missing #id header");
    if (!have_firm) throw MalformedDocument(source_name + ": missing #firm header");
    if (!have_quarter) throw MalformedDocument(source_name + ": missing #quarter header");
    if (!have_version) throw MalformedDocument(source_name + ": missing #version header");

    t.presentation = trim(presentation);
    if (t.presentation.empty())
        throw MalformedDocument(source_name + ": empty presentation");

    t.raw_turns = qa_turns;
    t.exchanges = segment_exchanges(qa_turns, t.transcript_id);
    return t;
}

inline Transcript parse_transcript_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedDocument("cannot open " + path);
    return parse_transcript(in, path);
}

// --- dedup --------------------------------------------------------------

struct DedupeLog {
    std::size_t multi_firm_dropped = 0;   // transcripts under >1 firm id
    std::size_t superseded_dropped = 0;   // older versions
};

// Keeps the highest version per transcript_id; drops every entry of a
// transcript_id that appears under more than one firm.
inline std::vector<Transcript> dedupe_corpus(std::vector<Transcript> transcripts,
                                             DedupeLog* log = nullptr) {
    std::map<std::string, std::set<std::string>> firms_by_id;
    for (const Transcript& t : transcripts)
        firms_by_id[t.transcript_id].insert(t.firm_id);

    std::map<std::string, const Transcript*> best;
    std::size_t multi_firm = 0;
    for (const Transcript& t : transcripts) {
        if (firms_by_id[t.transcript_id].size() > 1) { ++multi_firm; continue; }
        auto [it, inserted] = best.try_emplace(t.transcript_id, &t);
        if (!inserted && t.version > it->second->version) it->second = &t;
    }

    std::vector<Transcript> out;
    out.reserve(best.size());
    for (auto& [id, ptr] : best) out.push_back(*ptr);
    std::sort(out.begin(), out.end(), [](const Transcript& a, const Transcript& b) {
        return a.transcript_id < b.transcript_id;
    });

    if (log) {
        log->multi_firm_dropped = multi_firm;
        log->superseded_dropped = transcripts.size() - multi_firm - out.size();
    }
    return out;
}

// --- canonical serialization ---------------------------------------------

inline nlohmann::json exchange_to_json(const QAExchange& x) {
    nlohmann::json turns = nlohmann::json::array();
    for (const Turn& t : x.turns) {
        turns.push_back({{"role", role_name(t.speaker_role)},
                         {"name", t.speaker_name},
                         {"text", t.text}});
    }
    return {{"conver_id", x.conver_id}, {"order", x.order}, {"turns", turns}};
}

inline QAExchange exchange_from_json(const nlohmann::json& j) {
    QAExchange x;
    x.conver_id = j.at("conver_id").get<std::string>();
    x.order = j.at("order").get<int>();
    for (const auto& jt : j.at("turns")) {
        Turn t;
        t.speaker_role = role_from_label(jt.at("role").get<std::string>());
        t.speaker_name = jt.at("name").get<std::string>();
        t.text = jt.at("text").get<std::string>();
        x.turns.push_back(std::move(t));
    }
    return x;
}

// One exchange record per line.
inline std::string corpus_to_jsonl(const std::vector<Transcript>& transcripts) {
    std::string out;
    for (const Transcript& t : transcripts)
        for (const QAExchange& x : t.exchanges)
            out += exchange_to_json(x).dump() + "\n";
    return out;
}

// transcript_id for a conver_id (strip the trailing "-<order>").
inline std::string transcript_of(const std::string& conver_id) {
    const std::size_t pos = conver_id.rfind('-');
    return pos == std::string::npos ? conver_id : conver_id.substr(0, pos);
}

inline int order_of(const std::string& conver_id) {
    const std::size_t pos = conver_id.rfind('-');
    if (pos == std::string::npos) return 0;
    try { return static_cast<int>(parse_long(conver_id.substr(pos + 1))); }
    catch (const Error&) { return 0; }
}

}  // namespace norq

#endif  // NORQ_CORPUS_HPP_
