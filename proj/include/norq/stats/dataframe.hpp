// dataframe.hpp -- named-column view shared by the estimators.
//
// Numeric columns use NaN for missing; label columns hold firm ids,
// quarters, cluster keys. Rows with any missing required value drop out of
// a regression sample inside the estimator.

#ifndef NORQ_STATS_DATAFRAME_HPP_
#define NORQ_STATS_DATAFRAME_HPP_

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "norq/errors.hpp"
#include "norq/panel_io.hpp"

namespace norq::stats {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct DataFrame {
    std::size_t n = 0;
    std::map<std::string, std::vector<double>> numeric;
    std::map<std::string, std::vector<std::string>> labels;

    void add_numeric(const std::string& name, std::vector<double> values) {
        ensure_size(values.size());
        numeric[name] = std::move(values);
    }

    void add_labels(const std::string& name, std::vector<std::string> values) {
        ensure_size(values.size());
        labels[name] = std::move(values);
    }

    const std::vector<double>& num(const std::string& name) const {
        const auto it = numeric.find(name);
        if (it == numeric.end()) throw Error("no numeric column '" + name + "'");
        return it->second;
    }

    const std::vector<std::string>& lab(const std::string& name) const {
        const auto it = labels.find(name);
        if (it == labels.end()) throw Error("no label column '" + name + "'");
        return it->second;
    }

    bool has_numeric(const std::string& name) const { return numeric.count(name) > 0; }

private:
    void ensure_size(std::size_t size) {
        if (n == 0 && numeric.empty() && labels.empty()) n = size;
        if (size != n) throw Error("column size mismatch");
    }
};

inline DataFrame panel_to_dataframe(const std::vector<PanelRow>& rows) {
    DataFrame df;
    std::vector<std::string> firms, quarters;
    firms.reserve(rows.size());
    quarters.reserve(rows.size());
    for (const auto& r : rows) {
        firms.push_back(r.firm_id);
        quarters.push_back(r.quarter.str());
    }
    df.add_labels("firm_id", std::move(firms));
    df.add_labels("quarter", std::move(quarters));
    for (const PanelField& field : panel_fields()) {
        std::vector<double> column;
        column.reserve(rows.size());
        for (const auto& r : rows) {
            const auto v = field.get(r);
            column.push_back(v ? *v : kMissing);
        }
        df.add_numeric(field.name, std::move(column));
    }
    return df;
}

inline DataFrame individual_to_dataframe(const std::vector<IndividualRow>& rows) {
    DataFrame df;
    std::vector<std::string> firms, quarters, analysts;
    std::vector<double> error, time, nor;
    for (const auto& r : rows) {
        firms.push_back(r.firm_id);
        quarters.push_back(r.fiscal_quarter.str());
        analysts.push_back(r.analyst_id);
        error.push_back(r.error_individual);
        time.push_back(r.time_individual);
        nor.push_back(static_cast<double>(r.nor_firm));
    }
    df.add_labels("firm_id", std::move(firms));
    df.add_labels("quarter", std::move(quarters));
    df.add_labels("analyst_id", std::move(analysts));
    df.add_numeric("error_individual", std::move(error));
    df.add_numeric("time_individual", std::move(time));
    df.add_numeric("nor_firm", std::move(nor));
    return df;
}

}  // namespace norq::stats

#endif  // NORQ_STATS_DATAFRAME_HPP_
