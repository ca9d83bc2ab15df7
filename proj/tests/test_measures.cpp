#include <doctest.h>

#include "norq/measures.hpp"

#include <string>
#include <vector>

#include "norq/rng.hpp"

using namespace norq;

namespace {

NorAnnotation ann(const std::string& conver_id, int nor, int q = 7, int r = 9, int c = 8,
                  std::vector<NorCategory> cats = {}) {
    NorAnnotation a;
    a.conver_id = conver_id;
    a.model_id = "m";
    a.nor_count = nor;
    a.quantity = q;
    a.relevance = r;
    a.clarity = c;
    if (cats.empty() && nor > 0)
        cats.assign(static_cast<std::size_t>(nor), NorCategory::Refusal);
    a.categories = std::move(cats);
    for (int i = 0; i < nor; ++i) a.pairs.push_back({"q", "a"});
    return a;
}

NorAnnotation error_ann(const std::string& conver_id) {
    NorAnnotation a;
    a.conver_id = conver_id;
    a.model_id = "m";
    a.raw = "garbage";
    return a;
}

}  // namespace

TEST_CASE("summarize_call sums NORs and sets the indicator") {
    const std::vector<NorAnnotation> anns = {ann("T1-1", 0), ann("T1-2", 1), ann("T1-3", 0),
                                             ann("T1-4", 2)};
    const CallMeasures call = summarize_call("T1", anns);
    CHECK(call.nor_firm == 3);
    CHECK(call.nor_f == 1);
    CHECK(call.n_exchanges == 4);
    CHECK(call.n_errors == 0);
}

TEST_CASE("all-zero call has NOR_F 0 and Mscore from per-exchange means") {
    const std::vector<NorAnnotation> anns = {ann("T1-1", 0, 6, 9, 9), ann("T1-2", 0, 8, 9, 7)};
    const CallMeasures call = summarize_call("T1", anns);
    CHECK(call.nor_firm == 0);
    CHECK(call.nor_f == 0);
    CHECK(call.mean_quantity == doctest::Approx(7.0));
    CHECK(call.mean_relevance == doctest::Approx(9.0));
    CHECK(call.mean_clarity == doctest::Approx(8.0));
    CHECK(call.mscore == doctest::Approx(8.0));
}

TEST_CASE("constant scores reproduce the documented Mscore") {
    // Quantity 7.78, Relevance 9.24, Clarity 8.52 cannot be hit exactly per
    // exchange with integers, so use 100 exchanges that average to them.
    std::vector<NorAnnotation> anns;
    for (int i = 0; i < 100; ++i) {
        const int q = i < 78 ? 8 : 7;   // mean 7.78
        const int r = i < 24 ? 10 : 9;  // mean 9.24
        const int c = i < 52 ? 9 : 8;   // mean 8.52
        anns.push_back(ann("T1-" + std::to_string(i + 1), 0, q, r, c));
    }
    const CallMeasures call = summarize_call("T1", anns);
    CHECK(call.mean_quantity == doctest::Approx(7.78).epsilon(1e-12));
    CHECK(call.mean_relevance == doctest::Approx(9.24).epsilon(1e-12));
    CHECK(call.mean_clarity == doctest::Approx(8.52).epsilon(1e-12));
    CHECK(call.mscore == doctest::Approx((7.78 + 9.24 + 8.52) / 3.0).epsilon(1e-12));
    CHECK(call.mscore == doctest::Approx(8.513333333333332).epsilon(1e-9));
}

TEST_CASE("ERROR annotations leave sums and means, land in n_errors") {
    const std::vector<NorAnnotation> anns = {ann("T1-1", 1, 2, 3, 4), error_ann("T1-2"),
                                             ann("T1-3", 0, 8, 9, 10)};
    const CallMeasures call = summarize_call("T1", anns);
    CHECK(call.n_exchanges == 2);
    CHECK(call.n_errors == 1);
    CHECK(call.nor_firm == 1);
    CHECK(call.mean_quantity == doctest::Approx(5.0));
}

TEST_CASE("a call with only ERROR annotations throws AllErrored") {
    CHECK_THROWS_AS(summarize_call("T1", {error_ann("T1-1"), error_ann("T1-2")}), AllErrored);
}

TEST_CASE("category counts sum to NOR_Firm including the Other residual") {
    NorAnnotation unlabeled = ann("T1-3", 1, 5, 5, 5);
    unlabeled.categories.clear();  // identified but unlabeled -> Other
    const std::vector<NorAnnotation> anns = {
        ann("T1-1", 2, 5, 5, 5, {NorCategory::Refusal, NorCategory::Recall}),
        ann("T1-2", 1, 5, 5, 5, {NorCategory::Other}),
        unlabeled,
    };
    const CallMeasures call = summarize_call("T1", anns);
    CHECK(call.nor_firm == 4);
    int total = 0;
    for (const auto& [cat, count] : call.category_counts) total += count;
    CHECK(total == call.nor_firm);
    CHECK(call.category_counts.at(NorCategory::Other) == 2);
}

TEST_CASE("aggregation linearity over disjoint exchange sets") {
    Rng rng(5);
    std::vector<NorAnnotation> part_a, part_b;
    for (int i = 0; i < 30; ++i) {
        auto& dst = i < 15 ? part_a : part_b;
        dst.push_back(ann("T1-" + std::to_string(i + 1), static_cast<int>(rng.next_below(3))));
    }
    std::vector<NorAnnotation> all = part_a;
    all.insert(all.end(), part_b.begin(), part_b.end());
    const CallMeasures a = summarize_call("T1", part_a);
    const CallMeasures b = summarize_call("T1", part_b);
    const CallMeasures whole = summarize_call("T1", all);
    CHECK(whole.nor_firm == a.nor_firm + b.nor_firm);
}

TEST_CASE("quarter ratios: 7 of 10 calls with NORs") {
    std::vector<CallMeasures> calls(10);
    for (int i = 0; i < 10; ++i) {
        calls[i].transcript_id = "T" + std::to_string(i);
        calls[i].nor_f = i < 7 ? 1 : 0;
    }
    const QuarterRatios qr = quarter_ratios(calls, {}, Quarter(2020, 1));
    CHECK(qr.nor_f_ratio == doctest::Approx(0.70));
}

TEST_CASE("quarter ratios reproduce the large fixture counts") {
    // 91,503 clean, 15,384 with one NOR, 257 with two, 4 with three,
    // 416 errors: 107,564 conversations in total.
    std::vector<ConversationMeasure> conversations;
    conversations.reserve(107564);
    auto push = [&](std::size_t n, int nor, bool error = false) {
        for (std::size_t i = 0; i < n; ++i) {
            ConversationMeasure m;
            m.conver_id = "c" + std::to_string(conversations.size());
            m.error = error;
            m.nor_con = nor;
            m.nor_c = nor >= 1 ? 1 : 0;
            conversations.push_back(std::move(m));
        }
    };
    push(91503, 0);
    push(15384, 1);
    push(257, 2);
    push(4, 3);
    push(416, 0, true);
    REQUIRE(conversations.size() == 107564);

    const QuarterRatios qr = quarter_ratios({}, conversations, Quarter(2020, 1));
    CHECK(qr.n_conversations_nor == 15645);
    CHECK(qr.nor_con_sum == 15910);
    CHECK(qr.n_conversation_errors == 416);
    CHECK(qr.n_conversations == 107148);
    CHECK(qr.nor_c_ratio == doctest::Approx(15645.0 / 107148.0).epsilon(1e-12));
}

TEST_CASE("quarter ratios equal a brute-force recount on random fixtures") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ConversationMeasure> conversations;
        const std::size_t n = 1 + rng.next_below(300);
        for (std::size_t i = 0; i < n; ++i) {
            ConversationMeasure m;
            m.conver_id = "c" + std::to_string(i);
            m.error = rng.bernoulli(0.05);
            if (!m.error) {
                m.nor_con = static_cast<int>(rng.next_below(4));
                m.nor_c = m.nor_con >= 1;
            }
            conversations.push_back(m);
        }
        const QuarterRatios qr = quarter_ratios({}, conversations, Quarter(2021, 2));

        std::size_t valid = 0, with_nor = 0;
        for (const auto& m : conversations) {
            if (m.error) continue;
            ++valid;
            if (m.nor_c) ++with_nor;
        }
        if (valid > 0)
            CHECK(qr.nor_c_ratio ==
                  doctest::Approx(static_cast<double>(with_nor) / valid).epsilon(1e-12));
        CHECK(qr.n_conversations == valid);
    }
}

TEST_CASE("empty quarter throws") {
    CHECK_THROWS_AS(quarter_ratios({}, {}, Quarter(2020, 1)), EmptyQuarter);
}

TEST_CASE("mean NOR_C <= mean NOR_F on per-call aggregation") {
    Rng rng(29);
    std::vector<CallMeasures> calls;
    std::vector<ConversationMeasure> conversations;
    for (int call_i = 0; call_i < 50; ++call_i) {
        std::vector<NorAnnotation> anns;
        const std::size_t n = 1 + rng.next_below(8);
        for (std::size_t i = 0; i < n; ++i) {
            anns.push_back(ann("T" + std::to_string(call_i) + "-" + std::to_string(i + 1),
                               rng.bernoulli(0.2) ? 1 : 0));
            conversations.push_back(conversation_measure(anns.back()));
        }
        calls.push_back(summarize_call("T" + std::to_string(call_i), anns));
    }
    const QuarterRatios qr = quarter_ratios(calls, conversations, Quarter(2020, 3));
    CHECK(qr.nor_c_ratio <= qr.nor_f_ratio + 1e-12);
}

TEST_CASE("model overlap arithmetic") {
    auto conv = [](const std::string& id, int nor_c) {
        ConversationMeasure m;
        m.conver_id = id;
        m.nor_c = nor_c;
        m.nor_con = nor_c;
        return m;
    };

    SUBCASE("identical sets") {
        std::vector<ConversationMeasure> a = {conv("c1", 1), conv("c2", 0), conv("c3", 1)};
        const OverlapResult r = model_overlap(a, a);
        CHECK(r.common == 2);
        CHECK(r.only_a == 0);
        CHECK(r.only_b == 0);
        CHECK(r.jaccard == doctest::Approx(1.0));
    }

    SUBCASE("disjoint sets") {
        std::vector<ConversationMeasure> a = {conv("c1", 1), conv("c2", 0)};
        std::vector<ConversationMeasure> b = {conv("c1", 0), conv("c2", 1)};
        const OverlapResult r = model_overlap(a, b);
        CHECK(r.common == 0);
        CHECK(r.jaccard == doctest::Approx(0.0));
    }

    SUBCASE("documented counts: |A|=15645, |B|=12689, common=9422") {
        std::vector<ConversationMeasure> a, b;
        // 9,422 shared, then 6,223 only in A and 3,267 only in B
        for (int i = 0; i < 9422; ++i) {
            a.push_back(conv("shared" + std::to_string(i), 1));
            b.push_back(conv("shared" + std::to_string(i), 1));
        }
        for (int i = 0; i < 15645 - 9422; ++i) a.push_back(conv("a" + std::to_string(i), 1));
        for (int i = 0; i < 12689 - 9422; ++i) b.push_back(conv("b" + std::to_string(i), 1));
        const OverlapResult r = model_overlap(a, b);
        CHECK(r.common == 9422);
        CHECK(r.only_a == 6223);
        CHECK(r.only_b == 3267);
    }
}
