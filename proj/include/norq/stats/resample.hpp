// resample.hpp -- seeded bootstrap and the Fisher permutation test.
//
// Both draw per-iteration substreams from the master seed (derive_seed),
// so results are bit-identical across runs and would stay identical under
// any parallel schedule that merges in iteration order.

#ifndef NORQ_STATS_RESAMPLE_HPP_
#define NORQ_STATS_RESAMPLE_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "norq/errors.hpp"
#include "norq/rng.hpp"
#include "norq/stats/fe_ols.hpp"

namespace norq::stats {

struct BootstrapResult {
    std::string statistic;
    double point_estimate = 0.0;
    double resample_mean = 0.0;
    double resample_sd = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> samples;  // one statistic per iteration, iteration order
};

// Resamples `units` with replacement and recomputes `statistic` each
// iteration. The statistic sees the resampled values in draw order.
inline BootstrapResult bootstrap_ratio(
    const std::vector<double>& units,
    const std::function<double(const std::vector<double>&)>& statistic,
    std::size_t iterations, std::uint64_t seed, std::string name = "ratio") {
    if (units.empty()) throw EmptyInput("bootstrap_ratio: no units");
    if (iterations == 0) throw EmptyInput("bootstrap_ratio: zero iterations");

    BootstrapResult out;
    out.statistic = std::move(name);
    out.iterations = iterations;
    out.seed = seed;
    out.point_estimate = statistic(units);
    out.samples.resize(iterations);

    const std::size_t n = units.size();
    std::vector<double> buffer(n);
    for (std::size_t iter = 0; iter < iterations; ++iter) {
        Rng rng(derive_seed(seed, iter));
        for (std::size_t i = 0; i < n; ++i) buffer[i] = units[rng.next_below(n)];
        out.samples[iter] = statistic(buffer);
    }

    double mean = 0.0;
    for (double s : out.samples) mean += s;
    mean /= static_cast<double>(iterations);
    double ss = 0.0;
    for (double s : out.samples) ss += (s - mean) * (s - mean);
    out.resample_mean = mean;
    out.resample_sd = iterations > 1
                          ? std::sqrt(ss / static_cast<double>(iterations - 1))
                          : 0.0;
    return out;
}

inline double mean_statistic(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

struct PermutationResult {
    double observed_diff = 0.0;   // coef(partition==1) - coef(partition==0)
    double p_two_sided = 1.0;
    std::size_t n_permutations = 0;
    std::size_t n_extreme = 0;    // |perm diff| >= |observed diff|
    std::uint64_t seed = 0;
};

// Difference of the `target` coefficient across the two partition
// subsamples, with the partition labels permuted n_perm times.
// p = (1 + #extreme) / (n_perm + 1).
inline PermutationResult fisher_permutation_diff(const RegressionSpec& base_spec,
                                                 const DataFrame& df,
                                                 const std::string& partition,
                                                 const std::string& target,
                                                 std::size_t n_perm, std::uint64_t seed) {
    if (n_perm == 0) throw EmptyInput("fisher_permutation_diff: zero permutations");

    RegressionSpec spec = base_spec;
    spec.filter.reset();
    const auto rows = detail::usable_rows(spec, df);

    const auto& partition_col = df.num(partition);
    std::vector<std::size_t> rows_valid;
    std::vector<int> labels;
    for (const std::size_t r : rows) {
        const double v = partition_col[r];
        if (!std::isfinite(v)) continue;
        rows_valid.push_back(r);
        labels.push_back(v >= 0.5 ? 1 : 0);
    }

    auto split_diff = [&](const std::vector<int>& assignment) {
        std::vector<std::size_t> ones, zeros;
        for (std::size_t i = 0; i < rows_valid.size(); ++i)
            (assignment[i] == 1 ? ones : zeros).push_back(rows_valid[i]);
        const RegressionResult r1 = fe_ols_rows(spec, df, ones);
        const RegressionResult r0 = fe_ols_rows(spec, df, zeros);
        return r1.coef_of(target) - r0.coef_of(target);
    };

    PermutationResult out;
    out.seed = seed;
    out.n_permutations = n_perm;
    out.observed_diff = split_diff(labels);

    std::size_t extreme = 0;
    const double threshold = std::abs(out.observed_diff);
    std::vector<int> shuffled = labels;
    for (std::size_t iter = 0; iter < n_perm; ++iter) {
        Rng rng(derive_seed(seed, iter));
        shuffled = labels;
        rng.shuffle(shuffled);
        const double diff = split_diff(shuffled);
        if (std::abs(diff) >= threshold - 1e-15) ++extreme;
    }
    out.n_extreme = extreme;
    out.p_two_sided = (1.0 + static_cast<double>(extreme)) /
                      (static_cast<double>(n_perm) + 1.0);
    return out;
}

}  // namespace norq::stats

#endif  // NORQ_STATS_RESAMPLE_HPP_
