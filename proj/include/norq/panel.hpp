// panel.hpp -- controls, winsorization, and firm-quarter panel assembly.
//
// Inputs arrive as five CSV files (column dictionaries in the loaders
// below). assemble_panel() inner-joins them onto the call measures with a
// per-stage drop ledger, computes every control, sets the above-mean
// partition dummies, and ranks SurEar into within-quarter quintiles.
// Winsorization is a separate pass so the assembled rows keep the exact
// uncertainty identity; the pipeline winsorizes just before persisting
// the estimation sample.

#ifndef NORQ_PANEL_HPP_
#define NORQ_PANEL_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "norq/csv.hpp"
#include "norq/dates.hpp"
#include "norq/errors.hpp"
#include "norq/forecast.hpp"
#include "norq/lexicon.hpp"
#include "norq/market.hpp"
#include "norq/measures.hpp"

namespace norq {

// --- winsorization --------------------------------------------------------

// Linear-interpolation order statistic (1-based position 1 + (n-1)p).
inline double percentile_interp(std::vector<double> sorted_values, double p) {
    std::sort(sorted_values.begin(), sorted_values.end());
    const std::size_t n = sorted_values.size();
    if (n == 0) return 0.0;
    if (n == 1) return sorted_values[0];
    const double pos = (static_cast<double>(n) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}

// Values below the lower (above the upper) percentile are set to that
// percentile. Series shorter than 2 come back unchanged.
inline std::vector<double> winsorize(std::vector<double> series, double lower = 0.01,
                                     double upper = 0.99) {
    if (series.size() < 2) return series;
    const double lo = percentile_interp(series, lower);
    const double hi = percentile_interp(series, upper);
    for (double& x : series) x = std::clamp(x, lo, hi);
    return series;
}

// --- input records ---------------------------------------------------------

struct ForecastSummaryRow {
    std::string firm_id;
    Quarter quarter;
    double consensus_mean_eps = 0.0;
    double actual_eps = 0.0;
    int analyst_following = 0;
    double prior_close = 0.0;
    Date announcement_date;
};

struct FundamentalsRow {
    std::string firm_id;
    Quarter quarter;
    double total_assets = 0.0;
    double income_before_ei = 0.0;
    double total_debt = 0.0;
    double eps = 0.0;
    double shares_out = 0.0;
    double price_close = 0.0;
    double net_income = 0.0;
    double intangibles = 0.0;
    double rd_expense = 0.0;    // missing reported as empty -> 0
    double op_expense = 0.0;
    double n_divisions = 0.0;
    double inst_own = 0.0;
    double book_value = 0.0;
    double wt_ret = 0.0;
};

struct IncentiveStats {
    double comp = 0.0;     // mean over managers on the call
    double lwealth = 0.0;
};

using FirmQuarter = std::pair<std::string, int>;  // (firm_id, quarter index)

inline FirmQuarter fq_key(const std::string& firm, Quarter q) { return {firm, q.index}; }

// --- loaders ----------------------------------------------------------------

inline std::map<FirmQuarter, ForecastSummaryRow> load_forecast_summary(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto firm = t.col("firm_id"), quarter = t.col("quarter");
    const auto consensus = t.col("consensus_mean_eps"), actual = t.col("actual_eps");
    const auto following = t.col("analyst_following"), prior = t.col("prior_close");
    const auto announce = t.col("announcement_date");
    std::map<FirmQuarter, ForecastSummaryRow> out;
    for (const auto& row : t.rows) {
        ForecastSummaryRow r;
        r.firm_id = row[firm];
        r.quarter = Quarter::parse(row[quarter]);
        r.consensus_mean_eps = parse_double(row[consensus]);
        r.actual_eps = parse_double(row[actual]);
        r.analyst_following = static_cast<int>(parse_long(row[following]));
        r.prior_close = parse_double(row[prior]);
        r.announcement_date = Date::parse(row[announce]);
        out[fq_key(r.firm_id, r.quarter)] = r;
    }
    return out;
}

inline std::map<FirmQuarter, std::vector<IndividualForecast>> load_forecast_detail(
    const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto firm = t.col("firm_id"), quarter = t.col("quarter");
    const auto analyst = t.col("analyst_id"), eps = t.col("forecast_eps");
    const auto date = t.col("forecast_date");
    std::map<FirmQuarter, std::vector<IndividualForecast>> out;
    for (const auto& row : t.rows) {
        IndividualForecast f;
        f.analyst_id = row[analyst];
        f.forecast_eps = parse_double(row[eps]);
        f.forecast_date = Date::parse(row[date]);
        out[fq_key(row[firm], Quarter::parse(row[quarter]))].push_back(std::move(f));
    }
    return out;
}

inline std::map<FirmQuarter, FundamentalsRow> load_fundamentals(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto firm = t.col("firm_id"), quarter = t.col("quarter");
    const auto get = [&](const std::string& name) { return t.col(name); };
    const auto assets = get("total_assets"), income = get("income_before_ei");
    const auto debt = get("total_debt"), eps = get("eps"), shares = get("shares_out");
    const auto price = get("price_close"), net = get("net_income");
    const auto intang = get("intangibles"), rd = get("rd_expense"), op = get("op_expense");
    const auto divisions = get("n_divisions"), inst = get("inst_own");
    const auto book = get("book_value"), wt = get("wt_ret");
    std::map<FirmQuarter, FundamentalsRow> out;
    for (const auto& row : t.rows) {
        FundamentalsRow r;
        r.firm_id = row[firm];
        r.quarter = Quarter::parse(row[quarter]);
        r.total_assets = parse_double(row[assets]);
        r.income_before_ei = parse_double(row[income]);
        r.total_debt = parse_double(row[debt]);
        r.eps = parse_double(row[eps]);
        r.shares_out = parse_double(row[shares]);
        r.price_close = parse_double(row[price]);
        r.net_income = parse_double(row[net]);
        r.intangibles = parse_double(row[intang]);
        r.rd_expense = parse_double_opt(row[rd]).value_or(0.0);  // missing R&D reads as 0
        r.op_expense = parse_double(row[op]);
        r.n_divisions = parse_double(row[divisions]);
        r.inst_own = parse_double(row[inst]);
        r.book_value = parse_double(row[book]);
        r.wt_ret = parse_double(row[wt]);
        out[fq_key(r.firm_id, r.quarter)] = r;
    }
    return out;
}

inline std::map<std::string, std::vector<DailyBar>> load_daily_market(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto firm = t.col("firm_id"), date = t.col("date"), ret = t.col("ret");
    const auto mkt = t.col("mkt_ret"), bid = t.col("bid"), ask = t.col("ask");
    const auto volume = t.col("volume");
    std::map<std::string, std::vector<DailyBar>> out;
    for (const auto& row : t.rows) {
        DailyBar bar;
        bar.date = Date::parse(row[date]);
        bar.ret = parse_double(row[ret]);
        bar.mkt_ret = parse_double(row[mkt]);
        bar.bid = parse_double(row[bid]);
        bar.ask = parse_double(row[ask]);
        bar.volume = parse_double(row[volume]);
        out[row[firm]].push_back(bar);
    }
    for (auto& [id, bars] : out)
        std::sort(bars.begin(), bars.end(),
                  [](const DailyBar& a, const DailyBar& b) { return a.date < b.date; });
    return out;
}

// Multiple managers per call average into one row.
inline std::map<FirmQuarter, IncentiveStats> load_incentives(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto firm = t.col("firm_id"), quarter = t.col("quarter");
    const auto comp = t.col("comp"), lwealth = t.col("lwealth");
    std::map<FirmQuarter, std::vector<std::pair<double, double>>> grouped;
    for (const auto& row : t.rows)
        grouped[fq_key(row[firm], Quarter::parse(row[quarter]))]
            .emplace_back(parse_double(row[comp]), parse_double(row[lwealth]));
    std::map<FirmQuarter, IncentiveStats> out;
    for (const auto& [key, values] : grouped) {
        IncentiveStats s;
        for (const auto& [c, w] : values) {
            s.comp += c;
            s.lwealth += w;
        }
        s.comp /= static_cast<double>(values.size());
        s.lwealth /= static_cast<double>(values.size());
        out[key] = s;
    }
    return out;
}

// --- controls ---------------------------------------------------------------

struct Controls {
    std::optional<double> sur_ear;  // (eps_t - eps_{t-1}) / price_{t-1}
    std::optional<double> size;     // ln(assets_{t-1} + 1)
    std::optional<double> roa;
    std::optional<double> ret_vol;  // filled by the caller from daily data
    int loss = 0;
    std::optional<double> mkv;      // ln(shares_{t-1} * price_{t-1} + 1)
    std::optional<double> lev;
    double rd_exp = 0.0;            // R&D / operating expenses, missing -> 0
    std::optional<double> bm;       // filled by the caller (needs quarter-end price)
    std::optional<double> wt_ret;
};

inline Controls derive_controls(const FundamentalsRow& current,
                                const FundamentalsRow* prior) {
    Controls c;
    if (prior) {
        if (prior->price_close > 0.0)
            c.sur_ear = (current.eps - prior->eps) / prior->price_close;
        if (prior->total_assets > 0.0) c.size = std::log(prior->total_assets + 1.0);
        if (prior->shares_out > 0.0 && prior->price_close > 0.0)
            c.mkv = std::log(prior->shares_out * prior->price_close + 1.0);
    }
    if (current.total_assets > 0.0) {
        c.roa = current.income_before_ei / current.total_assets;
        c.lev = current.total_debt / current.total_assets;
    }
    c.loss = current.net_income < 0.0 ? 1 : 0;
    c.rd_exp = current.op_expense > 0.0 ? current.rd_expense / current.op_expense : 0.0;
    c.wt_ret = current.wt_ret;
    return c;
}

// --- the panel row -----------------------------------------------------------

struct PanelRow {
    std::string firm_id;
    Quarter quarter;
    std::string transcript_id;
    Date announcement_date;

    // non-response measures
    int nor_firm = 0;
    int nor_f = 0;
    std::map<NorCategory, int> category_counts;
    double mscore = 0.0;
    double quantity = 0.0;   // call-level mean
    double relevance = 0.0;
    double clarity = 0.0;
    std::size_t n_exchanges = 0;
    std::size_t n_errors = 0;

    // forecast features
    double error_firm = 0.0;
    std::optional<double> dispersion_firm;
    std::optional<double> uncertainty_firm;
    double squ_error_firm = 0.0;
    std::optional<double> squ_uncertainty_firm;
    int analyst_following = 0;

    // controls
    double sur_ear = 0.0;
    double size = 0.0;
    double roa = 0.0;
    double ret_vol = 0.0;
    int loss = 0;
    double mkv = 0.0;
    double lev = 0.0;
    double tone = 0.0;
    double uncert = 0.0;
    double forward = 0.0;
    double read = 0.0;
    double rd_exp = 0.0;
    std::optional<double> bm;
    double num_ana = 0.0;  // ln(1 + following)
    std::optional<double> wt_ret;

    // partitions
    int mo = 0;
    int inst = 0;
    int h_rd = 0;
    int covid = 0;

    // incentives (pre-joined file; optional sample)
    std::optional<double> comp;
    std::optional<double> lwealth;

    // market outcomes
    std::optional<double> car_2_60;
    std::optional<double> bhar_2_60;
    std::optional<double> ret_sd;
    std::optional<double> volume;
    std::optional<double> volume_raw;
    std::optional<double> spread;
    std::optional<double> qr_ueps;  // within-quarter SurEar quintile in {0,.25,.5,.75,1}
};

// --- selection ledger ---------------------------------------------------------

struct LedgerStage {
    std::string label;
    std::size_t dropped = 0;
    std::size_t remaining = 0;
};

struct SelectionLedger {
    std::size_t initial = 0;
    std::vector<LedgerStage> stages;

    std::string to_text() const {
        std::string out = "Selection\tDropped\tRemaining\n";
        out += "Calls with measures\t\t" + std::to_string(initial) + "\n";
        for (const auto& s : stages)
            out += s.label + "\t(" + std::to_string(s.dropped) + ")\t" +
                   std::to_string(s.remaining) + "\n";
        return out;
    }
};

// --- assembly -------------------------------------------------------------------

struct CallRecord {
    CallMeasures measures;
    TextMetrics presentation;
};

struct PanelOptions {
    bool h_rd_by_rd_expense = false;  // default: intangible assets
    Quarter covid_start = Quarter(2019, 4);
    Quarter covid_end = Quarter(2023, 2);
};

struct PanelBuild {
    std::vector<PanelRow> rows;
    std::vector<IndividualRow> individual_rows;
    SelectionLedger ledger;
};

namespace detail {

// Latest forecast per analyst within the window; the dispersion input set.
inline std::vector<double> eligible_forecasts(const std::vector<IndividualForecast>& all,
                                              Date announcement) {
    std::map<std::string, std::pair<Date, double>> latest;
    for (const auto& f : all) {
        const auto gap = f.forecast_date - announcement;
        if (gap < 0 || gap > 30) continue;
        auto it = latest.find(f.analyst_id);
        if (it == latest.end() || f.forecast_date >= it->second.first)
            latest[f.analyst_id] = {f.forecast_date, f.forecast_eps};
    }
    std::vector<double> out;
    out.reserve(latest.size());
    for (const auto& [id, entry] : latest) out.push_back(entry.second);
    return out;
}

}  // namespace detail

// squared consensus error without touching the dispersion machinery
inline double squared_variants_error_only(const ForecastInputs& f) {
    const double diff = f.consensus_mean_eps - f.actual_eps;
    if (!(f.prior_close > 0.0))
        throw MissingPrice("squared error: prior_close must be positive");
    return diff * diff / f.prior_close;
}

inline PanelBuild assemble_panel(const std::vector<CallRecord>& calls,
                                 const std::map<FirmQuarter, ForecastSummaryRow>& summary,
                                 const std::map<FirmQuarter, std::vector<IndividualForecast>>& detail_forecasts,
                                 const std::map<FirmQuarter, FundamentalsRow>& fundamentals,
                                 const std::map<std::string, std::vector<DailyBar>>& market,
                                 const std::map<FirmQuarter, IncentiveStats>& incentives,
                                 const PanelOptions& options = {}) {
    PanelBuild build;
    build.ledger.initial = calls.size();

    // one call per firm-quarter; duplicates drop deterministically
    std::set<FirmQuarter> seen;
    std::vector<const CallRecord*> unique_calls;
    std::size_t duplicate_drops = 0;
    {
        std::vector<const CallRecord*> sorted;
        sorted.reserve(calls.size());
        for (const auto& c : calls) sorted.push_back(&c);
        std::sort(sorted.begin(), sorted.end(), [](const CallRecord* a, const CallRecord* b) {
            return a->measures.transcript_id < b->measures.transcript_id;
        });
        for (const CallRecord* c : sorted) {
            const auto key = fq_key(c->measures.firm_id, c->measures.fiscal_quarter);
            if (!seen.insert(key).second) {
                ++duplicate_drops;
                continue;
            }
            unique_calls.push_back(c);
        }
    }
    build.ledger.stages.push_back(
        {"less duplicate firm-quarter calls", duplicate_drops, unique_calls.size()});

    // stage: analyst forecasts
    struct Staged {
        const CallRecord* call;
        const ForecastSummaryRow* forecast;
        std::vector<double> forecasts;
        const FundamentalsRow* current = nullptr;
        const FundamentalsRow* prior = nullptr;
        double ret_vol = 0.0;
    };
    std::vector<Staged> staged;
    for (const CallRecord* c : unique_calls) {
        const auto key = fq_key(c->measures.firm_id, c->measures.fiscal_quarter);
        const auto it = summary.find(key);
        if (it == summary.end() || !(it->second.prior_close > 0.0)) continue;
        Staged s;
        s.call = c;
        s.forecast = &it->second;
        const auto detail_it = detail_forecasts.find(key);
        if (detail_it != detail_forecasts.end())
            s.forecasts = detail::eligible_forecasts(detail_it->second,
                                                     it->second.announcement_date);
        staged.push_back(std::move(s));
    }
    build.ledger.stages.push_back({"less calls without analyst forecasts",
                                   unique_calls.size() - staged.size(), staged.size()});

    // stage: fundamentals (current + prior quarter)
    std::vector<Staged> with_fundamentals;
    for (Staged& s : staged) {
        const auto key = fq_key(s.call->measures.firm_id, s.call->measures.fiscal_quarter);
        const auto cur = fundamentals.find(key);
        const auto prev = fundamentals.find(
            fq_key(s.call->measures.firm_id, s.call->measures.fiscal_quarter.prev()));
        if (cur == fundamentals.end() || prev == fundamentals.end()) continue;
        if (!(cur->second.total_assets > 0.0) || !(prev->second.total_assets > 0.0) ||
            !(prev->second.price_close > 0.0))
            continue;
        s.current = &cur->second;
        s.prior = &prev->second;
        with_fundamentals.push_back(std::move(s));
    }
    build.ledger.stages.push_back({"less calls without financial fundamentals",
                                   staged.size() - with_fundamentals.size(),
                                   with_fundamentals.size()});

    // stage: market indicators (12 months of prior returns)
    std::vector<Staged> with_market;
    for (Staged& s : with_fundamentals) {
        const auto bars = market.find(s.call->measures.firm_id);
        if (bars == market.end()) continue;
        const auto vol = return_volatility(bars->second, s.forecast->announcement_date);
        if (!vol) continue;
        s.ret_vol = *vol;
        with_market.push_back(std::move(s));
    }
    build.ledger.stages.push_back({"less calls without stock market indicators",
                                   with_fundamentals.size() - with_market.size(),
                                   with_market.size()});

    // build rows
    for (const Staged& s : with_market) {
        const CallMeasures& m = s.call->measures;
        PanelRow row;
        row.firm_id = m.firm_id;
        row.quarter = m.fiscal_quarter;
        row.transcript_id = m.transcript_id;
        row.announcement_date = s.forecast->announcement_date;

        row.nor_firm = m.nor_firm;
        row.nor_f = m.nor_f;
        row.category_counts = m.category_counts;
        row.mscore = m.mscore;
        row.quantity = m.mean_quantity;
        row.relevance = m.mean_relevance;
        row.clarity = m.mean_clarity;
        row.n_exchanges = m.n_exchanges;
        row.n_errors = m.n_errors;

        ForecastInputs fi;
        fi.firm_id = m.firm_id;
        fi.fiscal_quarter = m.fiscal_quarter;
        fi.consensus_mean_eps = s.forecast->consensus_mean_eps;
        fi.actual_eps = s.forecast->actual_eps;
        fi.prior_close = s.forecast->prior_close;
        fi.announcement_date = s.forecast->announcement_date;
        fi.analyst_forecasts = s.forecasts;
        fi.analyst_following = s.forecasts.empty()
                                   ? s.forecast->analyst_following
                                   : static_cast<int>(s.forecasts.size());
        row.analyst_following = fi.analyst_following;
        row.error_firm = forecast_error(fi);
        row.squ_error_firm = squared_variants_error_only(fi);
        if (fi.analyst_forecasts.size() >= 2) {
            row.dispersion_firm = forecast_dispersion(fi);
            row.uncertainty_firm = uncertainty_from_parts(fi.analyst_following,
                                                          *row.dispersion_firm, row.error_firm);
            row.squ_uncertainty_firm = uncertainty_from_parts(
                fi.analyst_following, *row.dispersion_firm, row.squ_error_firm);
        }

        const Controls c = derive_controls(*s.current, s.prior);
        row.sur_ear = c.sur_ear.value_or(0.0);
        row.size = c.size.value_or(0.0);
        row.roa = c.roa.value_or(0.0);
        row.ret_vol = s.ret_vol;
        row.loss = c.loss;
        row.mkv = c.mkv.value_or(0.0);
        row.lev = c.lev.value_or(0.0);
        row.rd_exp = c.rd_exp;
        row.wt_ret = c.wt_ret;
        row.tone = s.call->presentation.tone;
        row.uncert = s.call->presentation.uncert;
        row.forward = s.call->presentation.forward;
        row.read = s.call->presentation.fog;
        row.num_ana = std::log(1.0 + static_cast<double>(row.analyst_following));

        const auto bars = market.find(m.firm_id);
        try {
            const MarketOutcomes out = market_outcomes(bars->second,
                                                       s.forecast->announcement_date);
            row.car_2_60 = out.car_2_60;
            row.bhar_2_60 = out.bhar_2_60;
            row.ret_sd = out.ret_sd;
            row.volume = out.volume;
            row.volume_raw = out.volume_raw;
            row.spread = out.spread;
        } catch (const InsufficientWindow&) {
            // outcomes stay missing; the row survives for the non-market tables
        }
        if (const auto price = quarter_end_price(bars->second, m.fiscal_quarter);
            price && *price > 0.0 && s.current->shares_out > 0.0)
            row.bm = s.current->book_value / (*price * s.current->shares_out);

        const auto inc = incentives.find(fq_key(m.firm_id, m.fiscal_quarter));
        if (inc != incentives.end()) {
            row.comp = inc->second.comp;
            row.lwealth = inc->second.lwealth;
        }

        row.covid = (m.fiscal_quarter >= options.covid_start &&
                     m.fiscal_quarter <= options.covid_end)
                        ? 1
                        : 0;
        build.rows.push_back(std::move(row));

        // individual rows for this call
        const auto detail_it = detail_forecasts.find(fq_key(m.firm_id, m.fiscal_quarter));
        if (detail_it != detail_forecasts.end()) {
            auto individual = individual_features(m.firm_id, m.fiscal_quarter,
                                                  detail_it->second, s.forecast->actual_eps,
                                                  s.forecast->prior_close,
                                                  s.forecast->announcement_date);
            for (auto& r : individual) r.nor_firm = m.nor_firm;
            build.individual_rows.insert(build.individual_rows.end(), individual.begin(),
                                         individual.end());
        }
    }

    build.ledger.stages.push_back({"final sample", 0, build.rows.size()});

    // above-mean partition dummies over the assembled sample
    if (!build.rows.empty()) {
        double mean_divisions = 0.0, mean_inst = 0.0, mean_risk = 0.0;
        for (const PanelRow& row : build.rows) {
            const auto& f = fundamentals.at(fq_key(row.firm_id, row.quarter));
            mean_divisions += f.n_divisions;
            mean_inst += f.inst_own;
            mean_risk += options.h_rd_by_rd_expense ? f.rd_expense : f.intangibles;
        }
        const double n = static_cast<double>(build.rows.size());
        mean_divisions /= n;
        mean_inst /= n;
        mean_risk /= n;
        for (PanelRow& row : build.rows) {
            const auto& f = fundamentals.at(fq_key(row.firm_id, row.quarter));
            row.mo = f.n_divisions > mean_divisions ? 1 : 0;
            row.inst = f.inst_own > mean_inst ? 1 : 0;
            const double risk = options.h_rd_by_rd_expense ? f.rd_expense : f.intangibles;
            row.h_rd = risk > mean_risk ? 1 : 0;
        }
    }

    // within-quarter SurEar quintiles, ties broken by (value, row index)
    std::map<int, std::vector<std::size_t>> by_quarter;
    for (std::size_t i = 0; i < build.rows.size(); ++i)
        by_quarter[build.rows[i].quarter.index].push_back(i);
    for (auto& [q, idx] : by_quarter) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (build.rows[a].sur_ear != build.rows[b].sur_ear)
                return build.rows[a].sur_ear < build.rows[b].sur_ear;
            return a < b;
        });
        const std::size_t n = idx.size();
        for (std::size_t rank = 0; rank < n; ++rank) {
            const std::size_t quintile = std::min<std::size_t>(4, rank * 5 / n);
            build.rows[idx[rank]].qr_ueps = static_cast<double>(quintile) / 4.0;
        }
    }

    return build;
}

}  // namespace norq

#endif  // NORQ_PANEL_HPP_
