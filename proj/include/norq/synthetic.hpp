// synthetic.hpp -- deterministic synthetic dataset generator.
//
// Builds a complete demo dataset under one directory: transcript files, the
// five CSV inputs, a scripted fixture for a second model, and a ready
// run.conf. Non-responses are planted with cue phrases the heuristic
// backend recognizes, and the forecast data is generated with a positive
// loading on the planted NOR count, so the full pipeline ends with a
// positive NOR coefficient by construction.

#ifndef NORQ_SYNTHETIC_HPP_
#define NORQ_SYNTHETIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "norq/annotation.hpp"
#include "norq/backend.hpp"
#include "norq/dates.hpp"
#include "norq/rng.hpp"

namespace norq {

struct SyntheticParams {
    int n_firms = 42;
    // straddles the 2023Q2 boundary so both COVID subsamples are populated
    Quarter first_quarter = Quarter(2022, 3);
    int n_quarters = 8;
    std::uint64_t seed = 20240901;
    double second_model_flip_rate = 0.20;   // disagreement with the planted truth
    double second_model_error_rate = 0.01;  // unparseable completions
};

namespace synth_detail {

inline const std::vector<std::string>& presentation_sentences() {
    static const std::vector<std::string> bank = {
        "We delivered strong growth across our operational segments this quarter.",
        "Revenue improved while regulatory uncertainty could pressure future margins.",
        "Our strategy remains resilient despite difficult macroeconomic headwinds.",
        "We expect continued improvement in profitability next quarter.",
        "The organization achieved record results in several international markets.",
        "Management believes the outlook depends on volatile commodity conditions.",
        "Cost discipline and operational excellence supported excellent cash conversion.",
        "Looking ahead, we anticipate incremental opportunity in adjacent categories.",
        "Some weakness in legacy volumes was offset by positive pricing momentum.",
        "We will maintain disciplined capital allocation going forward.",
    };
    return bank;
}

inline const std::vector<std::string>& analyst_names() {
    static const std::vector<std::string> bank = {
        "Alex Morgan", "Jordan Lee",   "Sam Rivera",  "Taylor Brooks",
        "Casey Nguyen", "Robin Patel", "Jamie Chen",  "Drew Carter",
        "Morgan Ellis", "Riley Fox"};
    return bank;
}

inline const std::vector<std::string>& manager_names() {
    static const std::vector<std::string> bank = {"Pat Sullivan", "Chris Webb", "Lee Donahue"};
    return bank;
}

inline const std::vector<std::string>& questions() {
    static const std::vector<std::string> bank = {
        "Could you walk us through the margin trajectory for the segment?",
        "How should we think about the backlog conversion cadence?",
        "What drove the sequential change in volumes this quarter?",
        "Can you quantify the pricing contribution to growth?",
        "Any color on capital expenditure plans for next year?",
        "How is the competitive environment evolving in your core markets?",
        "What are the working capital dynamics we should model?",
        "Could you size the impact of the recent product launch?",
    };
    return bank;
}

inline const std::vector<std::string>& clean_answers() {
    static const std::vector<std::string> bank = {
        "Margins expanded on favorable mix and continued cost control.",
        "Backlog conversion is tracking at roughly half within the year.",
        "Volumes reflected normal seasonality plus one discrete shipment shift.",
        "Pricing contributed about two points of growth in the quarter.",
        "Capital expenditure should run slightly above depreciation next year.",
        "The competitive environment remains rational in our core markets.",
        "Working capital should be a modest source of cash this year.",
        "The launch added low single digits to segment revenue.",
    };
    return bank;
}

// one answer per category, each carrying exactly its cue phrase
inline std::string nor_answer(NorCategory category) {
    switch (category) {
        case NorCategory::Refusal:
            return "We can't answer that question on this call.";
        case NorCategory::LackOfInfo:
            return "I don't know the precise figure at this point.";
        case NorCategory::LegalAffairs:
            return "Given the legal restrictions around the matter we cannot elaborate.";
        case NorCategory::Recall:
            return "We will get back to you with the exact details offline.";
        default:
            return "Let me talk about something else that excites us right now.";
    }
}

inline NorCategory draw_category(Rng& rng) {
    const double u = rng.next_double();
    if (u < 0.44) return NorCategory::LackOfInfo;
    if (u < 0.72) return NorCategory::Recall;
    if (u < 0.88) return NorCategory::Refusal;
    if (u < 0.97) return NorCategory::Irrelevant;
    return NorCategory::LegalAffairs;
}

inline Date weekday_on_or_after(Date d) {
    while (!d.is_weekday()) d = d.plus_days(1);
    return d;
}

}  // namespace synth_detail

struct SyntheticPlant {
    // planted truth, keyed by conver_id: NOR count and first Q/A pair
    struct Exchange {
        std::string conver_id;
        int nor = 0;
        std::vector<NorCategory> categories;
        std::string first_question;
        std::string first_answer;
    };
    std::vector<Exchange> exchanges;
    std::map<std::string, int> nor_firm;  // transcript_id -> planted count
};

// Writes the dataset and returns the planted truth (tests use it).
inline SyntheticPlant generate_synthetic(const std::string& dir, const SyntheticParams& p) {
    namespace fs = std::filesystem;
    using namespace synth_detail;

    fs::create_directories(dir);
    fs::create_directories(dir + "/corpus");
    fs::create_directories(dir + "/inputs");

    Rng rng(p.seed);
    SyntheticPlant plant;

    // one market path shared by every firm
    const Quarter last_quarter = [&] {
        Quarter q = p.first_quarter;
        for (int i = 1; i < p.n_quarters; ++i) q = q.next();
        return q;
    }();
    const Date market_start = p.first_quarter.prev().end_date().plus_days(-400);
    const Date market_end = last_quarter.end_date().plus_days(160);
    std::vector<Date> calendar;
    std::map<std::int64_t, double> market_return;
    for (Date d = market_start; d <= market_end; d = d.plus_days(1)) {
        if (!d.is_weekday()) continue;
        calendar.push_back(d);
        market_return[d.serial] = rng.normal(0.0003, 0.008);
    }

    // quarter-level equal-weighted market return
    std::map<int, double> quarterly_market_return;
    for (int qi = -1; qi <= p.n_quarters; ++qi)
        quarterly_market_return[p.first_quarter.index + qi] = rng.normal(0.015, 0.04);

    std::ofstream summary_csv(dir + "/inputs/forecasts_summary.csv");
    std::ofstream detail_csv(dir + "/inputs/forecasts_detail.csv");
    std::ofstream fundamentals_csv(dir + "/inputs/fundamentals.csv");
    std::ofstream market_csv(dir + "/inputs/daily_market.csv");
    std::ofstream incentives_csv(dir + "/inputs/incentives.csv");
    std::ofstream scripted(dir + "/inputs/scripted_second.jsonl");
    summary_csv << "firm_id,quarter,consensus_mean_eps,actual_eps,analyst_following,"
                   "prior_close,announcement_date\n";
    detail_csv << "firm_id,quarter,analyst_id,forecast_eps,forecast_date\n";
    fundamentals_csv << "firm_id,quarter,total_assets,income_before_ei,total_debt,eps,"
                        "shares_out,price_close,net_income,intangibles,rd_expense,"
                        "op_expense,n_divisions,inst_own,book_value,wt_ret\n";
    market_csv << "firm_id,date,ret,mkt_ret,bid,ask,volume\n";
    incentives_csv << "firm_id,quarter,manager,comp,lwealth\n";

    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.8g", v);
        return std::string(buf);
    };

    for (int f = 0; f < p.n_firms; ++f) {
        std::snprintf(buf, sizeof(buf), "F%03d", f + 1);
        const std::string firm(buf);
        const double nor_propensity = 0.06 + 0.22 * rng.next_double();
        const double base_assets = 15000.0 + 60000.0 * rng.next_double();
        const double base_price = 30.0 + 40.0 * rng.next_double();
        const double shares = 300.0 + 900.0 * rng.next_double();
        const double divisions = 1.0 + static_cast<double>(rng.next_below(9));
        const double inst_own = 0.2 + 0.7 * rng.next_double();
        const double intangibles = (0.05 + 0.35 * rng.next_double()) * base_assets;
        const double rd_expense = rng.bernoulli(0.2) ? 0.0 : 20.0 + 180.0 * rng.next_double();
        double avg_nor = 0.0;

        // fundamentals need the quarter before the first call
        std::map<int, double> eps_path, price_path;
        {
            Quarter q = p.first_quarter.prev();
            double eps = 1.0 + 2.0 * rng.next_double();
            double price = base_price;
            for (int qi = -1; qi < p.n_quarters; ++qi) {
                eps += rng.normal(0.03, 0.12);
                price *= 1.0 + rng.normal(0.01, 0.05);
                eps_path[q.index] = eps;
                price_path[q.index] = price;
                q = q.next();
            }
        }

        Quarter q = p.first_quarter.prev();
        for (int qi = -1; qi < p.n_quarters; ++qi) {
            const double assets = base_assets * (1.0 + 0.01 * (qi + 1));
            const double income = assets * rng.normal(0.012, 0.006);
            fundamentals_csv << firm << ',' << q.str() << ',' << fmt(assets) << ','
                             << fmt(income) << ',' << fmt(assets * (0.15 + 0.4 * rng.next_double()))
                             << ',' << fmt(eps_path[q.index]) << ',' << fmt(shares) << ','
                             << fmt(price_path[q.index]) << ','
                             << fmt(rng.bernoulli(0.08) ? -40.0 : income * 0.9) << ','
                             << fmt(intangibles) << ',' << (rd_expense == 0.0 ? "" : fmt(rd_expense))
                             << ',' << fmt(700.0 + 200.0 * rng.next_double()) << ','
                             << fmt(divisions) << ',' << fmt(inst_own) << ','
                             << fmt(0.45 * assets) << ','
                             // fiscal windows differ per firm, so the
                             // equal-weighted return varies within a quarter
                             << fmt(quarterly_market_return.at(q.index) +
                                    rng.normal(0.0, 0.01))
                             << '\n';
            q = q.next();
        }

        // daily bars
        for (const Date d : calendar) {
            const double mkt = market_return.at(d.serial);
            const double idio_sd = 0.010 + 0.004 * nor_propensity;
            const double ret = mkt + rng.normal(0.0, idio_sd);
            const double mid = base_price * (1.0 + 0.1 * rng.next_double());
            const double half_spread = mid * (0.0008 + 0.0008 * rng.next_double());
            market_csv << firm << ',' << d.str() << ',' << fmt(ret) << ',' << fmt(mkt) << ','
                       << fmt(mid - half_spread) << ',' << fmt(mid + half_spread) << ','
                       << fmt(4e5 + 4e6 * rng.next_double()) << '\n';
        }

        q = p.first_quarter;
        for (int qi = 0; qi < p.n_quarters; ++qi) {
            const std::string transcript_id = "T" + firm + "_" + q.str();
            const Date announcement =
                weekday_on_or_after(q.end_date().plus_days(25 + (f % 15)));

            // --- transcript ----------------------------------------------------
            const int n_exchanges = 5 + static_cast<int>(rng.next_below(5));
            // elevated non-response rates in the first half of the sample
            const double stress_bump =
                (q.index - p.first_quarter.index) < p.n_quarters / 2 ? 0.05 : 0.0;
            int nor_firm = 0;

            std::string qa_block;
            std::string prev_analyst;
            for (int e = 0; e < n_exchanges; ++e) {
                SyntheticPlant::Exchange px;
                px.conver_id = transcript_id + "-" + std::to_string(e + 1);

                // distinct analyst per exchange keeps the boundary stable
                std::string analyst = analyst_names()[rng.next_below(analyst_names().size())];
                while (analyst == prev_analyst)
                    analyst = analyst_names()[rng.next_below(analyst_names().size())];
                prev_analyst = analyst;
                const std::string manager =
                    manager_names()[rng.next_below(manager_names().size())];

                if (rng.bernoulli(0.3))
                    qa_block += "[Operator][]: The next question comes from " + analyst + ".\n";

                const int rounds = 1 + static_cast<int>(rng.next_below(3));
                const bool plant_nor = rng.bernoulli(nor_propensity + stress_bump);
                const int nor_round = plant_nor ? static_cast<int>(rng.next_below(rounds)) : -1;
                for (int round = 0; round < rounds; ++round) {
                    const std::string question = questions()[rng.next_below(questions().size())];
                    std::string answer;
                    if (round == nor_round) {
                        const NorCategory category = draw_category(rng);
                        answer = nor_answer(category);
                        px.categories.push_back(category);
                        ++px.nor;
                        ++nor_firm;
                    } else {
                        answer = clean_answers()[rng.next_below(clean_answers().size())];
                    }
                    if (round == 0) {
                        px.first_question = question;
                        px.first_answer = answer;
                    }
                    qa_block += "[Analyst][" + analyst + "]: " + question + "\n";
                    qa_block += "[Manager][" + manager + "]: " + answer + "\n";
                }
                plant.exchanges.push_back(std::move(px));
            }
            plant.nor_firm[transcript_id] = nor_firm;
            avg_nor += nor_firm;

            std::string presentation;
            const int n_sentences = 8 + static_cast<int>(rng.next_below(8));
            for (int s = 0; s < n_sentences; ++s) {
                if (s) presentation += " ";
                presentation +=
                    presentation_sentences()[rng.next_below(presentation_sentences().size())];
            }

            auto write_transcript = [&](int version, const std::string& path) {
                std::ofstream out(path);
                out << "#id: " << transcript_id << "\n#firm: " << firm
                    << "\n#quarter: " << q.str() << "\n#version: " << version << "\n"
                    << "[PRESENTATION]\n" << presentation << "\n[QA]\n" << qa_block;
            };
            write_transcript(2, dir + "/corpus/" + transcript_id + "_v2.txt");
            if (f % 9 == 3 && qi == 0)  // a few superseded duplicates for dedup
                write_transcript(1, dir + "/corpus/" + transcript_id + "_v1.txt");

            // --- forecasts ----------------------------------------------------
            const double prior_close = price_path[q.prev().index];
            const double actual = eps_path[q.index];
            const double error_scale =
                0.002 + 0.0015 * nor_firm + std::abs(rng.normal(0.0, 0.001));
            const double consensus =
                actual + (rng.bernoulli(0.5) ? 1.0 : -1.0) * error_scale * prior_close;
            const int following = 4 + static_cast<int>(rng.next_below(7));
            summary_csv << firm << ',' << q.str() << ',' << fmt(consensus) << ','
                        << fmt(actual) << ',' << following << ',' << fmt(prior_close) << ','
                        << announcement.str() << '\n';

            const double dispersion_scale = (0.006 + 0.003 * nor_firm) * prior_close;
            for (int a = 0; a < following; ++a) {
                const double forecast = consensus + rng.normal(0.0, dispersion_scale);
                // response time shrinks with NORs
                const double base_gap = 16.0 - 2.0 * std::min(nor_firm, 4) +
                                        rng.normal(0.0, 5.0);
                const std::int64_t gap =
                    static_cast<std::int64_t>(std::clamp(base_gap, 0.0, 28.0));
                detail_csv << firm << ',' << q.str() << ",AN" << (a + 1) << ','
                           << fmt(forecast) << ',' << announcement.plus_days(gap).str()
                           << '\n';
            }
            if (rng.bernoulli(0.3))  // a stale forecast outside the window
                detail_csv << firm << ',' << q.str() << ",AN99," << fmt(actual) << ','
                           << announcement.plus_days(35).str() << '\n';

            // --- incentives ---------------------------------------------------
            const int n_managers = 1 + static_cast<int>(rng.next_below(3));
            for (int m = 0; m < n_managers; ++m)
                incentives_csv << firm << ',' << q.str() << ','
                               << manager_names()[static_cast<std::size_t>(m) %
                                                  manager_names().size()]
                               << ',' << fmt(0.2 + 0.6 * rng.next_double()) << ','
                               << fmt(10.0 + 6.0 * rng.next_double()) << '\n';

            q = q.next();
        }
    }

    // --- second model fixture: planted truth with noise ------------------------
    for (const auto& px : plant.exchanges) {
        std::string completion;
        if (rng.bernoulli(p.second_model_error_rate)) {
            completion = "the model rambled and produced no JSON object";
        } else {
            NorAnnotation ann;
            const bool flip = rng.bernoulli(p.second_model_flip_rate);
            const bool says_nor = flip ? px.nor == 0 : px.nor > 0;
            // score ranges overlap across classes, as real model scores do
            if (says_nor) {
                ann.nor_count = px.nor > 0 ? px.nor : 1;
                ann.categories = px.categories;
                if (ann.categories.empty())
                    ann.categories.push_back(synth_detail::draw_category(rng));
                while (ann.categories.size() < static_cast<std::size_t>(ann.nor_count))
                    ann.categories.push_back(ann.categories.front());
                for (int i = 0; i < ann.nor_count; ++i)
                    ann.pairs.push_back({px.first_question, px.first_answer});
                ann.quantity = 2 + static_cast<int>(rng.next_below(6));
                ann.relevance = 4 + static_cast<int>(rng.next_below(6));
                ann.clarity = 5 + static_cast<int>(rng.next_below(5));
            } else {
                ann.nor_count = 0;
                ann.quantity = 5 + static_cast<int>(rng.next_below(5));
                ann.relevance = 7 + static_cast<int>(rng.next_below(4));
                ann.clarity = 7 + static_cast<int>(rng.next_below(4));
            }
            completion = annotation_to_reply(ann);
        }
        scripted << nlohmann::json{{"conver_id", px.conver_id}, {"completion", completion}}
                        .dump()
                 << "\n";
    }

    // --- a ready-to-run configuration ------------------------------------------
    {
        std::ofstream conf(dir + "/run.conf");
        conf << "# synthetic demo configuration\n"
             << "[paths]\n"
             << "corpus_dir = " << dir << "/corpus\n"
             << "lexicon_dir = data/lexicon\n"
             << "data_dir = " << dir << "/inputs\n"
             << "cache_dir = " << dir << "/out/cache\n"
             << "output_dir = " << dir << "/out\n\n"
             << "[backend]\n"
             << "kind = heuristic\n"
             << "model_id = heuristic-v1\n"
             << "second_kind = scripted\n"
             << "second_model_id = scripted-alt\n"
             << "second_scripted_fixture = " << dir << "/inputs/scripted_second.jsonl\n\n"
             << "[run]\n"
             << "seed = " << p.seed << "\n"
             << "bootstrap_iterations = 100000\n"
             << "permutation_count = 2000\n"
             << "stability_reps = 5\n"
             << "stability_sample = 100\n";
    }

    return plant;
}

}  // namespace norq

#endif  // NORQ_SYNTHETIC_HPP_
