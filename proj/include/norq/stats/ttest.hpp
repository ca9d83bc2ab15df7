// ttest.hpp -- Welch two-sample t test (unequal variances, two-sided).

#ifndef NORQ_STATS_TTEST_HPP_
#define NORQ_STATS_TTEST_HPP_

#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "norq/errors.hpp"

namespace norq::stats {

struct TTestResult {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_diff = 0.0;  // mean_a - mean_b
    double t_stat = 0.0;
    double p = 1.0;
    double dof = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

inline TTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw DegenerateGroup("two_sample_t: each group needs n >= 2");

    auto moments = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return std::pair<double, double>(mean, ss / static_cast<double>(xs.size() - 1));
    };
    const auto [mean_a, var_a] = moments(a);
    const auto [mean_b, var_b] = moments(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    TTestResult out;
    out.mean_a = mean_a;
    out.mean_b = mean_b;
    out.mean_diff = mean_a - mean_b;
    out.n_a = a.size();
    out.n_b = b.size();

    const double se2 = var_a / na + var_b / nb;
    if (se2 <= 0.0) {
        // identical constants in both groups
        out.t_stat = 0.0;
        out.p = 1.0;
        out.dof = na + nb - 2.0;
        return out;
    }
    out.t_stat = out.mean_diff / std::sqrt(se2);
    const double num = se2 * se2;
    const double den = (var_a / na) * (var_a / na) / (na - 1.0) +
                       (var_b / nb) * (var_b / nb) / (nb - 1.0);
    out.dof = num / den;
    const boost::math::students_t dist(out.dof);
    out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t_stat)));
    return out;
}

}  // namespace norq::stats

#endif  // NORQ_STATS_TTEST_HPP_
