// annotation.hpp -- model reply validation and the NorAnnotation record.
//
// Replies are supposed to be one JSON object with keys NOR / Pair /
// Category / Quantity / Relevance / Clarity. In practice models drift:
// code fences, trailing commas, bare `Lack of Info` values, bracketed
// speaker tags inside Pair, a duplicated Quantity key standing in for
// Category, and the prose aliases Inform -> Quantity, Relevant ->
// Relevance. validate_reply() runs a strict parse first and one tolerant
// repair pass after it; anything still unusable becomes an ERROR
// annotation with the raw text preserved.

#ifndef NORQ_ANNOTATION_HPP_
#define NORQ_ANNOTATION_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "norq/text.hpp"

namespace norq {

enum class NorCategory { Refusal, LackOfInfo, LegalAffairs, Recall, Irrelevant, Other };

inline std::string category_name(NorCategory c) {
    switch (c) {
        case NorCategory::Refusal: return "Refusal";
        case NorCategory::LackOfInfo: return "Lack of Info";
        case NorCategory::LegalAffairs: return "Legal Affairs";
        case NorCategory::Recall: return "Recall";
        case NorCategory::Irrelevant: return "Irrelevant";
        default: return "Other";
    }
}

// Returns nullopt for null/none labels, Other for unrecognized ones.
inline std::optional<NorCategory> parse_category(std::string_view label) {
    std::string key;
    for (char c : label)
        if (is_alpha(c)) key.push_back(to_upper(c));
    if (key.empty() || key == "NULL" || key == "NONE") return std::nullopt;
    if (key == "REFUSAL") return NorCategory::Refusal;
    if (key == "LACK" || key == "LACKOFINFO" || key == "LACKOFINFORMATION")
        return NorCategory::LackOfInfo;
    if (key == "LEGAL" || key == "LEGALAFFAIRS") return NorCategory::LegalAffairs;
    if (key == "RECALL") return NorCategory::Recall;
    if (key == "IRRELEVANT") return NorCategory::Irrelevant;
    return NorCategory::Other;
}

struct ExcerptPair {
    std::string question;
    std::string answer;
    bool operator==(const ExcerptPair&) const = default;
};

inline constexpr int kNorError = -1;
inline constexpr int kMaxNorCount = 3;

struct NorAnnotation {
    std::string conver_id;
    std::string model_id;
    int nor_count = kNorError;          // 0..3, or kNorError
    std::vector<ExcerptPair> pairs;     // |pairs| == nor_count when parseable
    std::vector<NorCategory> categories;  // multiset, one per identified NOR
    std::vector<std::string> other_labels;  // raw text of unrecognized labels
    int quantity = -1;                  // 0..10 when valid
    int relevance = -1;
    int clarity = -1;
    bool clamped = false;               // nor_count was clamped to kMaxNorCount
    int retries = 0;                    // transport retries (elicitor)
    std::string prompt_hash;
    std::string raw;                    // original completion text

    bool is_error() const { return nor_count == kNorError; }
};

namespace detail {

struct KeyValue {
    std::string key;
    enum Kind { Number, Text, Bracket, Null } kind = Text;
    double number = 0.0;
    std::string text;                   // Text => scalar, Bracket => raw region
    std::vector<std::string> list;      // array-of-strings values
};

inline std::size_t parse_value(std::string_view region, std::size_t pos,
                               const std::string& key, std::vector<KeyValue>& out);

inline bool is_known_key(std::string_view k) {
    return k == "NOR" || k == "Pair" || k == "Category" || k == "Quantity" ||
           k == "Relevance" || k == "Clarity" || k == "Inform" || k == "Relevant";
}

inline std::string canonical_key(std::string_view k) {
    if (k == "Inform") return "Quantity";
    if (k == "Relevant") return "Relevance";
    return std::string(k);
}

// Strips ``` fences, keeps inner content.
inline std::string strip_code_fences(std::string_view raw) {
    std::string out;
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw.compare(i, 3, "```") == 0) {
            i += 3;
            while (i < raw.size() && raw[i] != '\n') ++i;  // drop language tag
        } else {
            out.push_back(raw[i]);
            ++i;
        }
    }
    return out;
}

// First balanced {...} region, quote-aware. Empty when none found.
inline std::string first_balanced_object(std::string_view s) {
    const std::size_t start = s.find('{');
    if (start == std::string_view::npos) return {};
    int depth = 0;
    bool in_quote = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_quote) {
            if (c == '\\') ++i;
            else if (c == '"') in_quote = false;
        } else if (c == '"') {
            in_quote = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return std::string(s.substr(start, i - start + 1));
        }
    }
    return {};
}

// Balanced [...] or {...} starting at `pos`; returns one-past-the-end.
inline std::size_t skip_balanced(std::string_view s, std::size_t pos) {
    const char open = s[pos];
    const char close = open == '[' ? ']' : '}';
    int depth = 0;
    bool in_quote = false;
    for (std::size_t i = pos; i < s.size(); ++i) {
        const char c = s[i];
        if (in_quote) {
            if (c == '\\') ++i;
            else if (c == '"') in_quote = false;
        } else if (c == '"') {
            in_quote = true;
        } else if (c == open) {
            ++depth;
        } else if (c == close) {
            if (--depth == 0) return i + 1;
        }
    }
    return s.size();
}

// Tolerant key/value scan across the top level of the object region.
inline std::vector<KeyValue> scan_key_values(std::string_view region) {
    std::vector<KeyValue> out;
    std::size_t i = 0;
    const std::size_t n = region.size();
    while (i < n) {
        const char c = region[i];
        if (c == '"') {
            // quoted run: may be a key if a colon follows
            std::size_t j = i + 1;
            std::string content;
            while (j < n && region[j] != '"') {
                if (region[j] == '\\' && j + 1 < n) ++j;
                content.push_back(region[j]);
                ++j;
            }
            std::size_t after = j < n ? j + 1 : n;
            std::size_t k = after;
            while (k < n && (region[k] == ' ' || region[k] == '\t')) ++k;
            if (k < n && region[k] == ':' && is_known_key(content)) {
                i = parse_value(region, k + 1, canonical_key(content), out);
            } else {
                i = after;  // stray string, skip it
            }
        } else if (is_alpha(c)) {
            // bare key
            std::size_t j = i;
            while (j < n && is_alpha(region[j])) ++j;
            const std::string word(region.substr(i, j - i));
            std::size_t k = j;
            while (k < n && (region[k] == ' ' || region[k] == '\t')) ++k;
            if (k < n && region[k] == ':' && is_known_key(word)) {
                i = parse_value(region, k + 1, canonical_key(word), out);
            } else {
                i = j;
            }
        } else if (c == '[') {
            i = skip_balanced(region, i);  // e.g. [Analyst] tags outside Pair
        } else {
            ++i;
        }
    }
    return out;
}

inline std::size_t parse_value(std::string_view region, std::size_t pos,
                               const std::string& key, std::vector<KeyValue>& out) {
    const std::size_t n = region.size();
    while (pos < n && (region[pos] == ' ' || region[pos] == '\t' || region[pos] == '\n' ||
                       region[pos] == '\r')) ++pos;
    KeyValue kv;
    kv.key = key;
    if (pos >= n) { kv.kind = KeyValue::Null; out.push_back(kv); return pos; }

    const char c = region[pos];
    if (c == '[' || c == '{') {
        const std::size_t end = skip_balanced(region, pos);
        kv.kind = KeyValue::Bracket;
        kv.text = std::string(region.substr(pos, end - pos));
        out.push_back(std::move(kv));
        return end;
    }
    if (c == '"') {
        std::size_t j = pos + 1;
        std::string content;
        while (j < n && region[j] != '"') {
            if (region[j] == '\\' && j + 1 < n) ++j;
            content.push_back(region[j]);
            ++j;
        }
        kv.kind = KeyValue::Text;
        kv.text = std::move(content);
        out.push_back(std::move(kv));
        return j < n ? j + 1 : n;
    }
    // bare scalar up to comma / newline / closing brace
    std::size_t j = pos;
    while (j < n && region[j] != ',' && region[j] != '\n' && region[j] != '}') ++j;
    const std::string token = trim(region.substr(pos, j - pos));
    if (token.empty() || upper_copy(token) == "NULL" || upper_copy(token) == "NONE") {
        kv.kind = KeyValue::Null;
    } else {
        char* endp = nullptr;
        const double num = std::strtod(token.c_str(), &endp);
        if (endp && *endp == '\0') {
            kv.kind = KeyValue::Number;
            kv.number = num;
        } else {
            kv.kind = KeyValue::Text;
            kv.text = token;
        }
    }
    out.push_back(std::move(kv));
    return j;
}

// Pairs appear as alternating quoted strings inside the Pair region.
inline std::vector<ExcerptPair> pairs_from_region(std::string_view region) {
    std::vector<std::string> strings;
    bool in_quote = false;
    std::string current;
    for (std::size_t i = 0; i < region.size(); ++i) {
        const char c = region[i];
        if (in_quote) {
            if (c == '\\' && i + 1 < region.size()) {
                current.push_back(region[++i]);
            } else if (c == '"') {
                in_quote = false;
                strings.push_back(std::move(current));
                current.clear();
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            in_quote = true;
        }
    }
    std::vector<ExcerptPair> pairs;
    for (std::size_t i = 0; i + 1 < strings.size(); i += 2)
        pairs.push_back({strings[i], strings[i + 1]});
    return pairs;
}

inline std::vector<KeyValue> key_values_from_json(const nlohmann::json& j) {
    std::vector<KeyValue> out;
    for (const auto& [key, value] : j.items()) {
        if (!is_known_key(key)) continue;
        KeyValue kv;
        kv.key = canonical_key(key);
        if (value.is_number()) {
            kv.kind = KeyValue::Number;
            kv.number = value.get<double>();
        } else if (value.is_string()) {
            kv.kind = KeyValue::Text;
            kv.text = value.get<std::string>();
        } else if (value.is_null()) {
            kv.kind = KeyValue::Null;
        } else if (value.is_array()) {
            kv.kind = KeyValue::Bracket;
            kv.text = value.dump();
            for (const auto& item : value) {
                if (item.is_string()) kv.list.push_back(item.get<std::string>());
            }
            if (kv.key == "Pair") {
                // keep raw dump; pair extraction handles shapes below
            }
        } else {
            kv.kind = KeyValue::Text;
            kv.text = value.dump();
        }
        out.push_back(std::move(kv));
    }
    return out;
}

// Pair value in strict JSON: [[q, a], ...] or [{question, answer}, ...] or
// a flat list of strings paired in order.
inline std::vector<ExcerptPair> pairs_from_json(const nlohmann::json& arr) {
    std::vector<ExcerptPair> pairs;
    std::vector<std::string> flat;
    for (const auto& item : arr) {
        if (item.is_array() && item.size() >= 2 && item[0].is_string() && item[1].is_string()) {
            pairs.push_back({item[0].get<std::string>(), item[1].get<std::string>()});
        } else if (item.is_object()) {
            std::vector<std::string> values;
            for (const auto& [k, v] : item.items())
                if (v.is_string()) values.push_back(v.get<std::string>());
            if (item.contains("question") && item.contains("answer")) {
                pairs.push_back({item["question"].get<std::string>(),
                                 item["answer"].get<std::string>()});
            } else if (values.size() >= 2) {
                pairs.push_back({values[0], values[1]});
            }
        } else if (item.is_string()) {
            flat.push_back(item.get<std::string>());
        }
    }
    for (std::size_t i = 0; i + 1 < flat.size(); i += 2)
        pairs.push_back({flat[i], flat[i + 1]});
    return pairs;
}

}  // namespace detail

// Splits a bracketed region like `["Refusal", "Recall"]` or `[Refusal]`
// into label candidates.
inline std::vector<std::string> tokenize_csvish(std::string_view bracketed) {
    std::string inner(bracketed);
    if (!inner.empty() && inner.front() == '[') inner.erase(inner.begin());
    if (!inner.empty() && inner.back() == ']') inner.pop_back();
    std::vector<std::string> out;
    std::string current;
    for (char c : inner) {
        if (c == ',') {
            std::string t = trim(current);
            if (!t.empty()) out.push_back(std::move(t));
            current.clear();
        } else if (c != '"') {
            current.push_back(c);
        }
    }
    std::string t = trim(current);
    if (!t.empty()) out.push_back(std::move(t));
    return out;
}

// Validates a completion. Never throws: unusable replies come back as
// ERROR annotations with the raw text kept for audit.
inline NorAnnotation validate_reply(const std::string& raw) {
    NorAnnotation ann;
    ann.raw = raw;

    const std::string cleaned = detail::strip_code_fences(raw);
    const std::string region = detail::first_balanced_object(cleaned);
    if (region.empty()) return ann;  // ERROR

    std::vector<detail::KeyValue> kvs;
    std::vector<ExcerptPair> json_pairs;
    bool have_json_pairs = false;

    nlohmann::json parsed = nlohmann::json::parse(region, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) {
        kvs = detail::key_values_from_json(parsed);
        if (parsed.contains("Pair") && parsed["Pair"].is_array()) {
            json_pairs = detail::pairs_from_json(parsed["Pair"]);
            have_json_pairs = true;
        }
    } else {
        kvs = detail::scan_key_values(region);  // the one repair pass
    }

    std::optional<int> nor;
    std::optional<int> quantity, relevance, clarity;
    std::vector<NorCategory> categories;
    std::vector<std::string> other_labels;
    std::vector<ExcerptPair> pairs = json_pairs;

    auto add_label = [&](const std::string& label) {
        const auto cat = parse_category(label);
        if (!cat) return;
        categories.push_back(*cat);
        if (*cat == NorCategory::Other) other_labels.push_back(trim(label));
    };

    for (const auto& kv : kvs) {
        if (kv.key == "NOR") {
            if (!nor && kv.kind == detail::KeyValue::Number)
                nor = static_cast<int>(kv.number);
            // text / null NOR stays unset => ERROR
        } else if (kv.key == "Pair") {
            if (!have_json_pairs && kv.kind == detail::KeyValue::Bracket)
                pairs = detail::pairs_from_region(kv.text);
        } else if (kv.key == "Category") {
            if (kv.kind == detail::KeyValue::Text) add_label(kv.text);
            else if (kv.kind == detail::KeyValue::Bracket) {
                if (!kv.list.empty()) {
                    for (const auto& label : kv.list) add_label(label);
                } else {
                    // bracketed bare labels from the tolerant path
                    for (const auto& piece : tokenize_csvish(kv.text)) add_label(piece);
                }
            }
        } else if (kv.key == "Quantity") {
            if (kv.kind == detail::KeyValue::Number) {
                if (!quantity) quantity = static_cast<int>(kv.number);
            } else if (kv.kind == detail::KeyValue::Text) {
                // duplicated Quantity slot actually carrying the category
                add_label(kv.text);
            }
        } else if (kv.key == "Relevance") {
            if (!relevance && kv.kind == detail::KeyValue::Number)
                relevance = static_cast<int>(kv.number);
        } else if (kv.key == "Clarity") {
            if (!clarity && kv.kind == detail::KeyValue::Number)
                clarity = static_cast<int>(kv.number);
        }
    }

    if (!nor || *nor < 0 || !quantity || !relevance || !clarity)
        return ann;  // ERROR: required keys missing or malformed

    ann.nor_count = *nor;
    if (ann.nor_count > kMaxNorCount) {
        ann.nor_count = kMaxNorCount;
        ann.clamped = true;
    }
    auto clamp_score = [](int s) { return std::clamp(s, 0, 10); };
    ann.quantity = clamp_score(*quantity);
    ann.relevance = clamp_score(*relevance);
    ann.clarity = clamp_score(*clarity);

    if (ann.nor_count == 0) {
        ann.pairs.clear();
        ann.categories.clear();
        ann.other_labels.clear();
        return ann;
    }

    ann.pairs = std::move(pairs);
    // one label per identified NOR; a single label for several pairs is
    // replicated across them
    if (categories.size() == 1 && ann.nor_count > 1)
        categories.resize(static_cast<std::size_t>(ann.nor_count), categories[0]);
    ann.categories = std::move(categories);
    ann.other_labels = std::move(other_labels);
    return ann;
}

// --- canonical reply + JSONL forms ---------------------------------------

// Canonical completion text for an annotation; validate_reply() of this
// round-trips.
inline std::string annotation_to_reply(const NorAnnotation& ann) {
    nlohmann::json j;
    if (ann.is_error()) {
        j["NOR"] = "ERROR";
        return j.dump();
    }
    j["NOR"] = ann.nor_count;
    if (ann.pairs.empty()) {
        j["Pair"] = nullptr;
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : ann.pairs) arr.push_back({p.question, p.answer});
        j["Pair"] = arr;
    }
    if (ann.categories.empty()) {
        j["Category"] = nullptr;
    } else {
        nlohmann::json arr = nlohmann::json::array();
        std::size_t other_used = 0;
        for (const auto c : ann.categories) {
            if (c == NorCategory::Other && other_used < ann.other_labels.size())
                arr.push_back(ann.other_labels[other_used++]);
            else
                arr.push_back(category_name(c));
        }
        j["Category"] = arr;
    }
    j["Quantity"] = ann.quantity;
    j["Relevance"] = ann.relevance;
    j["Clarity"] = ann.clarity;
    return j.dump();
}

inline nlohmann::json annotation_to_json(const NorAnnotation& ann) {
    nlohmann::json j;
    j["conver_id"] = ann.conver_id;
    j["model_id"] = ann.model_id;
    j["nor"] = ann.is_error() ? nlohmann::json("ERROR") : nlohmann::json(ann.nor_count);
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : ann.pairs) pairs.push_back({p.question, p.answer});
    j["pairs"] = pairs;
    nlohmann::json cats = nlohmann::json::array();
    std::size_t other_used = 0;
    for (const auto c : ann.categories) {
        if (c == NorCategory::Other && other_used < ann.other_labels.size())
            cats.push_back(ann.other_labels[other_used++]);
        else
            cats.push_back(category_name(c));
    }
    j["categories"] = cats;
    j["quantity"] = ann.quantity;
    j["relevance"] = ann.relevance;
    j["clarity"] = ann.clarity;
    j["clamped"] = ann.clamped;
    j["retries"] = ann.retries;
    j["prompt_hash"] = ann.prompt_hash;
    j["raw"] = ann.raw;
    return j;
}

inline NorAnnotation annotation_from_json(const nlohmann::json& j) {
    NorAnnotation ann;
    ann.conver_id = j.at("conver_id").get<std::string>();
    ann.model_id = j.at("model_id").get<std::string>();
    if (j.at("nor").is_number()) ann.nor_count = j.at("nor").get<int>();
    for (const auto& p : j.at("pairs"))
        ann.pairs.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
    for (const auto& c : j.at("categories")) {
        const std::string label = c.get<std::string>();
        const auto cat = parse_category(label);
        if (!cat) continue;
        ann.categories.push_back(*cat);
        if (*cat == NorCategory::Other) ann.other_labels.push_back(label);
    }
    ann.quantity = j.at("quantity").get<int>();
    ann.relevance = j.at("relevance").get<int>();
    ann.clarity = j.at("clarity").get<int>();
    ann.clamped = j.value("clamped", false);
    ann.retries = j.value("retries", 0);
    ann.prompt_hash = j.value("prompt_hash", "");
    ann.raw = j.value("raw", "");
    return ann;
}

}  // namespace norq

#endif  // NORQ_ANNOTATION_HPP_
