#include <doctest.h>

#include "norq/market.hpp"

#include <cmath>
#include <vector>

#include "norq/rng.hpp"

using namespace norq;

namespace {

// weekday bars starting the day after `start`, n trading days
std::vector<DailyBar> constant_bars(Date start, int n, double ret, double mkt_ret,
                                    double bid = 9.9, double ask = 10.1,
                                    double volume = 1e6) {
    std::vector<DailyBar> bars;
    Date d = start;
    while (static_cast<int>(bars.size()) < n) {
        d = d.plus_days(1);
        if (!d.is_weekday()) continue;
        bars.push_back({d, ret, mkt_ret, bid, ask, volume});
    }
    return bars;
}

}  // namespace

TEST_CASE("zero abnormal return gives zero CAR and BHAR") {
    const Date announcement(2020, 3, 2);
    const auto bars = constant_bars(announcement, 70, 0.01, 0.01);
    const MarketOutcomes out = market_outcomes(bars, announcement);
    REQUIRE(out.car_2_60.has_value());
    REQUIRE(out.bhar_2_60.has_value());
    CHECK(*out.car_2_60 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(*out.bhar_2_60 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("constant 1% abnormal return over the drift window") {
    const Date announcement(2020, 3, 2);
    const auto bars = constant_bars(announcement, 70, 0.01, 0.0);
    const MarketOutcomes out = market_outcomes(bars, announcement);
    REQUIRE(out.car_2_60.has_value());
    CHECK(*out.car_2_60 == doctest::Approx(0.59).epsilon(1e-12));
    CHECK(*out.bhar_2_60 == doctest::Approx(std::pow(1.01, 59) - 1.0).epsilon(1e-12));
    // constant returns: zero volatility
    CHECK(out.ret_sd == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("volume and spread proxies over days 1..30") {
    const Date announcement(2020, 3, 2);
    const auto bars = constant_bars(announcement, 40, 0.0, 0.0, 19.8, 20.2, 2.5e6);
    const MarketOutcomes out = market_outcomes(bars, announcement);
    CHECK(out.volume_raw == doctest::Approx(2.5e6));
    CHECK(out.volume == doctest::Approx(std::log(2.5e6)).epsilon(1e-12));
    CHECK(out.spread == doctest::Approx(0.4 / 20.0).epsilon(1e-12));
    // tape too short for the drift window
    CHECK_FALSE(out.car_2_60.has_value());
}

TEST_CASE("too short a tape raises InsufficientWindow") {
    const Date announcement(2020, 3, 2);
    const auto bars = constant_bars(announcement, 10, 0.0, 0.0);
    CHECK_THROWS_AS(market_outcomes(bars, announcement), InsufficientWindow);
}

TEST_CASE("drift window starts at day 2") {
    const Date announcement(2020, 3, 2);
    auto bars = constant_bars(announcement, 70, 0.0, 0.0);
    bars[0].ret = 0.5;  // day 1 shock stays out of CAR
    bars[1].ret = 0.01; // day 2 is in
    const MarketOutcomes out = market_outcomes(bars, announcement);
    CHECK(*out.car_2_60 == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("bars on or before the announcement date are ignored") {
    const Date announcement(2020, 3, 2);
    auto bars = constant_bars(announcement, 70, 0.01, 0.0);
    std::vector<DailyBar> with_history = constant_bars(Date(2020, 1, 1), 30, -0.5, 0.0);
    with_history.insert(with_history.end(), bars.begin(), bars.end());
    const MarketOutcomes a = market_outcomes(bars, announcement);
    const MarketOutcomes b = market_outcomes(with_history, announcement);
    CHECK(*a.car_2_60 == *b.car_2_60);
    CHECK(a.ret_sd == b.ret_sd);
}

TEST_CASE("return volatility over the 12 preceding months") {
    // flat daily returns of r for every weekday during 2019: monthly
    // compounded returns vary with the number of trading days per month
    std::vector<DailyBar> bars;
    for (Date d(2019, 1, 1); d < Date(2020, 2, 1); d = d.plus_days(1))
        if (d.is_weekday()) bars.push_back({d, 0.001, 0.0, 9.9, 10.1, 1e6});

    const auto vol = return_volatility(bars, Date(2020, 1, 20));
    REQUIRE(vol.has_value());
    // reference: direct recompute
    double growth[12];
    int counts[12] = {0};
    for (int m = 0; m < 12; ++m) growth[m] = 1.0;
    for (const auto& bar : bars) {
        if (bar.date.year() != 2019) continue;
        const int m = bar.date.month() - 1;
        growth[m] *= 1.001;
        counts[m]++;
    }
    double mean = 0.0;
    for (int m = 0; m < 12; ++m) mean += growth[m] - 1.0;
    mean /= 12.0;
    double ss = 0.0;
    for (int m = 0; m < 12; ++m) ss += (growth[m] - 1.0 - mean) * (growth[m] - 1.0 - mean);
    const double expected = 100.0 * std::sqrt(ss / 11.0);
    CHECK(*vol == doctest::Approx(expected).epsilon(1e-12));

    // missing months -> nullopt
    std::vector<DailyBar> sparse(bars.begin(), bars.begin() + 40);
    CHECK_FALSE(return_volatility(sparse, Date(2020, 1, 20)).has_value());
}

TEST_CASE("quarter end price averages the last month's midpoints") {
    std::vector<DailyBar> bars;
    for (Date d(2020, 1, 1); d < Date(2020, 4, 1); d = d.plus_days(1))
        if (d.is_weekday())
            bars.push_back({d, 0.0, 0.0, d.month() == 3 ? 19.0 : 9.0,
                            d.month() == 3 ? 21.0 : 11.0, 1e6});
    const auto price = quarter_end_price(bars, Quarter(2020, 1));
    REQUIRE(price.has_value());
    CHECK(*price == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_FALSE(quarter_end_price(bars, Quarter(2021, 1)).has_value());
}
