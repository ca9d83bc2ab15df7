// measures.hpp -- conversation- and call-level non-response measures,
// category tallies, Gricean score summaries, quarterly ratios, and the
// two-model overlap.

#ifndef NORQ_MEASURES_HPP_
#define NORQ_MEASURES_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "norq/annotation.hpp"
#include "norq/dates.hpp"
#include "norq/errors.hpp"

namespace norq {

inline constexpr std::array<NorCategory, 6> kAllCategories = {
    NorCategory::Refusal,   NorCategory::LackOfInfo, NorCategory::LegalAffairs,
    NorCategory::Recall,    NorCategory::Irrelevant, NorCategory::Other};

struct ConversationMeasure {
    std::string conver_id;
    bool error = false;
    int nor_c = 0;    // 1 if any non-response in the exchange
    int nor_con = 0;  // number of non-responses in the exchange
    std::vector<NorCategory> categories;
    int quantity = -1;
    int relevance = -1;
    int clarity = -1;
};

inline ConversationMeasure conversation_measure(const NorAnnotation& ann) {
    ConversationMeasure m;
    m.conver_id = ann.conver_id;
    if (ann.is_error()) {
        m.error = true;
        return m;
    }
    m.nor_con = ann.nor_count;
    m.nor_c = ann.nor_count >= 1 ? 1 : 0;
    m.categories = ann.categories;
    // identified NORs with no usable label are reported under Other
    while (m.categories.size() < static_cast<std::size_t>(m.nor_con))
        m.categories.push_back(NorCategory::Other);
    m.quantity = ann.quantity;
    m.relevance = ann.relevance;
    m.clarity = ann.clarity;
    return m;
}

struct CallMeasures {
    std::string transcript_id;
    std::string firm_id;
    Quarter fiscal_quarter;
    int nor_f = 0;     // 1 if any non-response in the call
    int nor_firm = 0;  // sum of nor_con over valid exchanges
    std::map<NorCategory, int> category_counts;
    double mean_quantity = 0.0;
    double mean_relevance = 0.0;
    double mean_clarity = 0.0;
    double mscore = 0.0;  // mean of the three per-call means
    std::size_t n_exchanges = 0;  // valid (non-error) exchanges
    std::size_t n_errors = 0;
};

// Aggregates one call's annotations. ERROR rows are excluded from every sum
// and mean and only counted in n_errors.
inline CallMeasures summarize_call(const std::string& transcript_id,
                                   const std::vector<NorAnnotation>& annotations) {
    CallMeasures call;
    call.transcript_id = transcript_id;
    for (const NorCategory c : kAllCategories) call.category_counts[c] = 0;

    double sum_q = 0.0, sum_r = 0.0, sum_c = 0.0;
    for (const NorAnnotation& ann : annotations) {
        const ConversationMeasure m = conversation_measure(ann);
        if (m.error) {
            ++call.n_errors;
            continue;
        }
        ++call.n_exchanges;
        call.nor_firm += m.nor_con;
        for (const NorCategory c : m.categories) ++call.category_counts[c];
        sum_q += m.quantity;
        sum_r += m.relevance;
        sum_c += m.clarity;
    }
    if (call.n_exchanges == 0)
        throw AllErrored("call " + transcript_id + " has no valid annotations");

    call.nor_f = call.nor_firm >= 1 ? 1 : 0;
    const double n = static_cast<double>(call.n_exchanges);
    call.mean_quantity = sum_q / n;
    call.mean_relevance = sum_r / n;
    call.mean_clarity = sum_c / n;
    call.mscore = (call.mean_quantity + call.mean_relevance + call.mean_clarity) / 3.0;
    return call;
}

struct QuarterRatios {
    Quarter quarter;
    std::size_t n_calls = 0;
    std::size_t n_calls_nor = 0;
    std::size_t n_conversations = 0;      // valid only
    std::size_t n_conversations_nor = 0;  // NOR_C == 1
    std::size_t n_conversation_errors = 0;
    long nor_con_sum = 0;                 // total NORs across conversations
    double nor_f_ratio = 0.0;
    double nor_c_ratio = 0.0;
    std::map<NorCategory, double> category_ratios;  // share of valid conversations
};

// Ratios over valid units only; ERROR conversations leave the denominator.
inline QuarterRatios quarter_ratios(const std::vector<CallMeasures>& calls,
                                    const std::vector<ConversationMeasure>& conversations,
                                    Quarter quarter) {
    if (calls.empty() && conversations.empty())
        throw EmptyQuarter("no units in quarter " + quarter.str());

    QuarterRatios out;
    out.quarter = quarter;
    out.n_calls = calls.size();
    for (const auto& call : calls)
        if (call.nor_f) ++out.n_calls_nor;

    std::map<NorCategory, std::size_t> category_hits;
    for (const NorCategory c : kAllCategories) category_hits[c] = 0;
    for (const auto& conv : conversations) {
        if (conv.error) {
            ++out.n_conversation_errors;
            continue;
        }
        ++out.n_conversations;
        out.nor_con_sum += conv.nor_con;
        if (conv.nor_c) ++out.n_conversations_nor;
        std::set<NorCategory> seen(conv.categories.begin(), conv.categories.end());
        for (const NorCategory c : seen) ++category_hits[c];
    }

    if (out.n_calls > 0)
        out.nor_f_ratio = static_cast<double>(out.n_calls_nor) /
                          static_cast<double>(out.n_calls);
    if (out.n_conversations > 0) {
        out.nor_c_ratio = static_cast<double>(out.n_conversations_nor) /
                          static_cast<double>(out.n_conversations);
        for (const NorCategory c : kAllCategories)
            out.category_ratios[c] = static_cast<double>(category_hits[c]) /
                                     static_cast<double>(out.n_conversations);
    }
    return out;
}

struct OverlapResult {
    std::size_t common = 0;
    std::size_t only_a = 0;
    std::size_t only_b = 0;
    double jaccard = 0.0;
};

// Set overlap of conver_ids flagged NOR_C == 1 by each model. ERROR rows
// never enter either set.
inline OverlapResult model_overlap(const std::vector<ConversationMeasure>& a,
                                   const std::vector<ConversationMeasure>& b) {
    std::set<std::string> set_a, set_b;
    for (const auto& m : a)
        if (!m.error && m.nor_c) set_a.insert(m.conver_id);
    for (const auto& m : b)
        if (!m.error && m.nor_c) set_b.insert(m.conver_id);

    OverlapResult out;
    for (const auto& id : set_a)
        if (set_b.count(id)) ++out.common;
    out.only_a = set_a.size() - out.common;
    out.only_b = set_b.size() - out.common;
    const std::size_t uni = set_a.size() + set_b.size() - out.common;
    out.jaccard = uni == 0 ? 0.0 : static_cast<double>(out.common) / static_cast<double>(uni);
    return out;
}

}  // namespace norq

#endif  // NORQ_MEASURES_HPP_
