// forecast.hpp -- analyst forecast features: error, dispersion, overall
// uncertainty, their squared variants, and individual-analyst rows.

#ifndef NORQ_FORECAST_HPP_
#define NORQ_FORECAST_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "norq/dates.hpp"
#include "norq/errors.hpp"

namespace norq {

struct ForecastInputs {
    std::string firm_id;
    Quarter fiscal_quarter;
    double consensus_mean_eps = 0.0;
    double actual_eps = 0.0;
    std::vector<double> analyst_forecasts;  // from the detail file when supplied
    int analyst_following = 0;
    double prior_close = 0.0;  // closing price of the previous fiscal quarter
    Date announcement_date;
};

// |consensus - actual| / prior close
inline double forecast_error(const ForecastInputs& f) {
    if (!(f.prior_close > 0.0))
        throw MissingPrice("forecast_error: prior_close must be positive for " + f.firm_id);
    return std::abs(f.consensus_mean_eps - f.actual_eps) / f.prior_close;
}

// sample SD (n-1 denominator) of individual forecasts / prior close
inline double forecast_dispersion(const ForecastInputs& f) {
    if (!(f.prior_close > 0.0))
        throw MissingPrice("forecast_dispersion: prior_close must be positive for " + f.firm_id);
    const std::size_t n = f.analyst_forecasts.size();
    if (n < 2)
        throw TooFewForecasts("forecast_dispersion: need >= 2 forecasts for " + f.firm_id);
    double mean = 0.0;
    for (double x : f.analyst_forecasts) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : f.analyst_forecasts) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return sd / f.prior_close;
}

// (1 - 1/following) * dispersion + error. With a single analyst the
// dispersion term vanishes and uncertainty equals error exactly.
inline double forecast_uncertainty(const ForecastInputs& f) {
    const double error = forecast_error(f);
    if (f.analyst_following <= 1) return error;
    const double dispersion = forecast_dispersion(f);
    return (1.0 - 1.0 / static_cast<double>(f.analyst_following)) * dispersion + error;
}

inline double uncertainty_from_parts(int following, double dispersion, double error) {
    if (following <= 1) return error;
    return (1.0 - 1.0 / static_cast<double>(following)) * dispersion + error;
}

struct SquaredVariants {
    double squ_error = 0.0;
    double squ_uncertainty = 0.0;
};

// squared consensus error scaled by price; uncertainty with the squared
// error substituted into the error term
inline SquaredVariants squared_variants(const ForecastInputs& f) {
    if (!(f.prior_close > 0.0))
        throw MissingPrice("squared_variants: prior_close must be positive for " + f.firm_id);
    SquaredVariants out;
    const double diff = f.consensus_mean_eps - f.actual_eps;
    out.squ_error = diff * diff / f.prior_close;
    if (f.analyst_following <= 1) {
        out.squ_uncertainty = out.squ_error;
    } else {
        const double dispersion = forecast_dispersion(f);
        out.squ_uncertainty =
            (1.0 - 1.0 / static_cast<double>(f.analyst_following)) * dispersion + out.squ_error;
    }
    return out;
}

// --- individual analysts --------------------------------------------------

struct IndividualForecast {
    std::string analyst_id;
    double forecast_eps = 0.0;
    Date forecast_date;
};

struct IndividualRow {
    std::string analyst_id;
    std::string firm_id;
    Quarter fiscal_quarter;
    double error_individual = 0.0;  // |forecast - actual| / prior close
    double time_individual = 0.0;   // ln(days since announcement + 1)
    int nor_firm = 0;               // joined later from call measures
};

// Keeps the latest forecast per analyst within the [0, 30] day window after
// the announcement; everything else is skipped.
inline std::vector<IndividualRow> individual_features(
    const std::string& firm_id, Quarter quarter,
    const std::vector<IndividualForecast>& forecasts, double actual_eps, double prior_close,
    Date announcement_date) {
    if (!(prior_close > 0.0))
        throw MissingPrice("individual_features: prior_close must be positive for " + firm_id);

    struct Latest {
        IndividualForecast forecast;
        std::size_t input_order = 0;
    };
    std::map<std::string, Latest> latest;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const auto& f = forecasts[i];
        const std::int64_t gap = f.forecast_date - announcement_date;
        if (gap < 0 || gap > 30) continue;  // outside the window
        auto it = latest.find(f.analyst_id);
        if (it == latest.end() ||
            f.forecast_date > it->second.forecast.forecast_date ||
            (f.forecast_date == it->second.forecast.forecast_date && i > it->second.input_order)) {
            latest[f.analyst_id] = {f, i};
        }
    }

    std::vector<IndividualRow> rows;
    rows.reserve(latest.size());
    for (const auto& [analyst_id, entry] : latest) {
        IndividualRow row;
        row.analyst_id = analyst_id;
        row.firm_id = firm_id;
        row.fiscal_quarter = quarter;
        row.error_individual =
            std::abs(entry.forecast.forecast_eps - actual_eps) / prior_close;
        const double gap =
            static_cast<double>(entry.forecast.forecast_date - announcement_date);
        row.time_individual = std::log(gap + 1.0);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace norq

#endif  // NORQ_FORECAST_HPP_
