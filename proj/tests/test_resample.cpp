#include <doctest.h>

#include "norq/stats/resample.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "norq/rng.hpp"

using namespace norq;
using namespace norq::stats;

namespace {

DataFrame permutation_panel(Rng& rng, int n_firms, int n_quarters, double slope_one,
                            double slope_zero) {
    DataFrame df;
    std::vector<std::string> firms, quarters;
    std::vector<double> y, x, part;
    for (int f = 0; f < n_firms; ++f) {
        const double part_value = f % 2 == 0 ? 1.0 : 0.0;  // firm-level partition
        for (int q = 0; q < n_quarters; ++q) {
            firms.push_back("F" + std::to_string(f));
            quarters.push_back("Q" + std::to_string(q));
            const double xv = rng.normal(0.0, 1.0);
            x.push_back(xv);
            part.push_back(part_value);
            const double slope = part_value == 1.0 ? slope_one : slope_zero;
            y.push_back(slope * xv + rng.normal(0.0, 0.5));
        }
    }
    df.add_labels("firm_id", firms);
    df.add_labels("quarter", quarters);
    df.add_numeric("y", y);
    df.add_numeric("x0", x);
    df.add_numeric("part", part);
    return df;
}

RegressionSpec perm_spec() {
    RegressionSpec spec;
    spec.name = "perm";
    spec.dependent = "y";
    spec.regressors = {"x0"};
    return spec;
}

}  // namespace

TEST_CASE("bootstrap of a constant series has zero spread") {
    const std::vector<double> units(50, 0.7);
    const BootstrapResult r = bootstrap_ratio(units, mean_statistic, 500, 42);
    CHECK(r.point_estimate == doctest::Approx(0.7));
    CHECK(r.resample_mean == doctest::Approx(0.7));
    CHECK(r.resample_sd == doctest::Approx(0.0));
}

TEST_CASE("bootstrap mean lands near the binomial expectation") {
    Rng rng(4242);
    std::vector<double> units;
    for (int i = 0; i < 1000; ++i) units.push_back(rng.bernoulli(0.3) ? 1.0 : 0.0);
    const BootstrapResult r = bootstrap_ratio(units, mean_statistic, 20000, 777);
    const double se = std::sqrt(0.3 * 0.7 / 1000.0);
    CHECK(std::abs(r.resample_mean - 0.3) < 3.0 * se);
    // resample SD estimates the sampling SE
    CHECK(r.resample_sd == doctest::Approx(se).epsilon(0.15));
    CHECK(r.samples.size() == 20000);
}

TEST_CASE("same seed gives bit-identical results, different seed does not") {
    std::vector<double> units;
    Rng rng(11);
    for (int i = 0; i < 200; ++i) units.push_back(rng.bernoulli(0.4) ? 1.0 : 0.0);
    const BootstrapResult a = bootstrap_ratio(units, mean_statistic, 2000, 9001);
    const BootstrapResult b = bootstrap_ratio(units, mean_statistic, 2000, 9001);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    CHECK(a.resample_mean == b.resample_mean);
    CHECK(a.resample_sd == b.resample_sd);

    const BootstrapResult c = bootstrap_ratio(units, mean_statistic, 2000, 9002);
    bool any_different = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i] != c.samples[i]) { any_different = true; break; }
    CHECK(any_different);
}

TEST_CASE("bootstrap rejects empty inputs") {
    CHECK_THROWS_AS(bootstrap_ratio({}, mean_statistic, 10, 1), EmptyInput);
    CHECK_THROWS_AS(bootstrap_ratio({1.0}, mean_statistic, 0, 1), EmptyInput);
}

TEST_CASE("permutation p-value is calibrated under the null") {
    // partition unrelated to the slope: p should rarely fall under 0.05
    int above = 0;
    for (int run = 0; run < 20; ++run) {
        Rng rng(10000 + run);
        const DataFrame df = permutation_panel(rng, 20, 6, 1.0, 1.0);
        const PermutationResult r =
            fisher_permutation_diff(perm_spec(), df, "part", "x0", 99, 555 + run);
        if (r.p_two_sided > 0.05) ++above;
    }
    CHECK(above >= 17);
}

TEST_CASE("permutation test detects a planted 2x slope difference") {
    Rng rng(2024);
    const DataFrame df = permutation_panel(rng, 50, 8, 2.0, 1.0);  // 400 rows
    const PermutationResult r =
        fisher_permutation_diff(perm_spec(), df, "part", "x0", 999, 31337);
    CHECK(r.observed_diff > 0.5);
    CHECK(r.p_two_sided < 0.01);
}

TEST_CASE("permutation p is invariant under partition relabeling") {
    Rng rng(3333);
    DataFrame df = permutation_panel(rng, 16, 5, 1.6, 1.0);
    const PermutationResult direct =
        fisher_permutation_diff(perm_spec(), df, "part", "x0", 199, 777);

    auto flipped_col = df.num("part");
    for (double& v : flipped_col) v = 1.0 - v;
    df.numeric["part"] = flipped_col;
    const PermutationResult flipped =
        fisher_permutation_diff(perm_spec(), df, "part", "x0", 199, 777);
    CHECK(direct.observed_diff == doctest::Approx(-flipped.observed_diff).epsilon(1e-10));
    CHECK(direct.p_two_sided == doctest::Approx(flipped.p_two_sided).epsilon(1e-12));
}

TEST_CASE("zero permutations are rejected") {
    Rng rng(1);
    const DataFrame df = permutation_panel(rng, 8, 4, 1.0, 1.0);
    CHECK_THROWS_AS(fisher_permutation_diff(perm_spec(), df, "part", "x0", 0, 1),
                    EmptyInput);
}
