// market.hpp -- post-announcement market outcomes from daily bars.
//
// Day 1 is the first trading day strictly after the announcement date.
// Drift runs over days 2..60 (59 trading days); the uncertainty proxies
// run over days 1..30. Drift fields are optional when the tape is too
// short; fewer than 30 post days raises InsufficientWindow.

#ifndef NORQ_MARKET_HPP_
#define NORQ_MARKET_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "norq/dates.hpp"
#include "norq/errors.hpp"

namespace norq {

struct DailyBar {
    Date date;
    double ret = 0.0;      // daily stock return
    double mkt_ret = 0.0;  // daily market return
    double bid = 0.0;
    double ask = 0.0;
    double volume = 0.0;   // shares
};

struct MarketOutcomes {
    std::optional<double> car_2_60;   // sum of (r - m), days 2..60
    std::optional<double> bhar_2_60;  // prod(1+r) - prod(1+m), days 2..60
    double ret_sd = 0.0;              // SD of daily returns, days 1..30
    double volume = 0.0;              // ln mean daily share volume, days 1..30
    double volume_raw = 0.0;          // mean daily share volume, days 1..30
    double spread = 0.0;              // mean (ask-bid)/midpoint, days 1..30
};

// bars must be sorted by date and belong to one firm.
inline MarketOutcomes market_outcomes(const std::vector<DailyBar>& bars,
                                      Date announcement_date) {
    std::vector<const DailyBar*> post;
    for (const auto& bar : bars)
        if (bar.date > announcement_date) post.push_back(&bar);

    if (post.size() < 30)
        throw InsufficientWindow("only " + std::to_string(post.size()) +
                                 " trading days after " + announcement_date.str());

    MarketOutcomes out;

    // proxies: days 1..30
    double mean_ret = 0.0;
    double mean_volume = 0.0;
    double mean_spread = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
        mean_ret += post[i]->ret;
        mean_volume += post[i]->volume;
        const double mid = 0.5 * (post[i]->ask + post[i]->bid);
        mean_spread += mid > 0.0 ? (post[i]->ask - post[i]->bid) / mid : 0.0;
    }
    mean_ret /= 30.0;
    mean_volume /= 30.0;
    mean_spread /= 30.0;

    double ss = 0.0;
    for (std::size_t i = 0; i < 30; ++i)
        ss += (post[i]->ret - mean_ret) * (post[i]->ret - mean_ret);
    out.ret_sd = std::sqrt(ss / 29.0);
    out.volume_raw = mean_volume;
    out.volume = std::log(mean_volume > 0.0 ? mean_volume : 1.0);
    out.spread = mean_spread;

    // drift: days 2..60
    if (post.size() >= 60) {
        double car = 0.0, cum_r = 1.0, cum_m = 1.0;
        for (std::size_t i = 1; i < 60; ++i) {  // post[1] is day 2
            car += post[i]->ret - post[i]->mkt_ret;
            cum_r *= 1.0 + post[i]->ret;
            cum_m *= 1.0 + post[i]->mkt_ret;
        }
        out.car_2_60 = car;
        out.bhar_2_60 = cum_r - cum_m;
    }
    return out;
}

// SD of the 12 calendar-month compounded returns preceding the
// announcement month, in percent. Returns nullopt when any of the 12
// months has no trading data.
inline std::optional<double> return_volatility(const std::vector<DailyBar>& bars,
                                               Date announcement_date) {
    const int anchor_year = announcement_date.year();
    const int anchor_month = announcement_date.month();

    auto month_index = [](int y, int m) { return y * 12 + (m - 1); };
    const int anchor = month_index(anchor_year, anchor_month);

    // growth factor per eligible month
    std::vector<double> growth(12, 1.0);
    std::vector<bool> seen(12, false);
    for (const auto& bar : bars) {
        const int idx = anchor - month_index(bar.date.year(), bar.date.month());
        if (idx < 1 || idx > 12) continue;  // want the 12 months before the anchor month
        growth[static_cast<std::size_t>(idx - 1)] *= 1.0 + bar.ret;
        seen[static_cast<std::size_t>(idx - 1)] = true;
    }
    for (bool s : seen)
        if (!s) return std::nullopt;

    double mean = 0.0;
    for (double g : growth) mean += g - 1.0;
    mean /= 12.0;
    double ss = 0.0;
    for (double g : growth) ss += (g - 1.0 - mean) * (g - 1.0 - mean);
    return 100.0 * std::sqrt(ss / 11.0);
}

// Mean bid/ask midpoint over the last calendar month of the quarter
// (the BM price input). nullopt when that month has no bars.
inline std::optional<double> quarter_end_price(const std::vector<DailyBar>& bars,
                                               Quarter quarter) {
    const Date end = quarter.end_date();
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& bar : bars) {
        if (bar.date.year() == end.year() && bar.date.month() == end.month()) {
            sum += 0.5 * (bar.bid + bar.ask);
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace norq

#endif  // NORQ_MARKET_HPP_
