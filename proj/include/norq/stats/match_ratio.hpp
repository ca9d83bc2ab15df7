// match_ratio.hpp -- stability of repeated annotation runs against a
// baseline: per-conversation match percentages and the grouped summary
// (N / mean / SD / min / max by baseline label, plus a Total row).

#ifndef NORQ_STATS_MATCH_RATIO_HPP_
#define NORQ_STATS_MATCH_RATIO_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "norq/errors.hpp"

namespace norq::stats {

struct MatchGroupStats {
    std::string label;  // "0", "1", "Total"
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct MatchRatioResult {
    std::vector<std::pair<std::string, double>> per_unit;  // conver_id -> percent
    MatchGroupStats group0;
    MatchGroupStats group1;
    MatchGroupStats total;
};

namespace detail {

inline MatchGroupStats summarize_group(const std::string& label,
                                       const std::vector<double>& values) {
    MatchGroupStats s;
    s.label = label;
    s.n = values.size();
    if (values.empty()) return s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    s.mean = mean;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

}  // namespace detail

// baseline: conver_id -> NOR_C in {0,1}. Each repetition must cover every
// baseline conversation; a gap raises CoverageGap.
inline MatchRatioResult match_ratio(const std::map<std::string, int>& baseline,
                                    const std::vector<std::map<std::string, int>>& repetitions) {
    if (baseline.empty()) throw EmptyInput("match_ratio: empty baseline");
    if (repetitions.empty()) throw EmptyInput("match_ratio: no repetitions");

    for (std::size_t r = 0; r < repetitions.size(); ++r)
        for (const auto& [id, nor] : baseline)
            if (!repetitions[r].count(id))
                throw CoverageGap("repetition " + std::to_string(r) +
                                  " does not cover " + id);

    MatchRatioResult out;
    std::vector<double> values0, values1, all;
    for (const auto& [id, nor] : baseline) {
        std::size_t matches = 0;
        for (const auto& rep : repetitions)
            if (rep.at(id) == nor) ++matches;
        const double percent = 100.0 * static_cast<double>(matches) /
                               static_cast<double>(repetitions.size());
        out.per_unit.emplace_back(id, percent);
        (nor == 0 ? values0 : values1).push_back(percent);
        all.push_back(percent);
    }
    out.group0 = detail::summarize_group("0", values0);
    out.group1 = detail::summarize_group("1", values1);
    out.total = detail::summarize_group("Total", all);
    return out;
}

}  // namespace norq::stats

#endif  // NORQ_STATS_MATCH_RATIO_HPP_
