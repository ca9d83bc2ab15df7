#include <doctest.h>

#include "norq/stats/fe_ols.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "norq/rng.hpp"

using namespace norq;
using namespace norq::stats;

namespace {

struct SimPanel {
    DataFrame df;
    int n_firms = 0;
    int n_quarters = 0;
};

// Unbalanced random panel with known slope structure:
// y = sum_j beta_j x_j + firm effect + quarter effect + noise_sd * e
SimPanel simulate_panel(Rng& rng, int n_firms, int n_quarters,
                        const std::vector<double>& betas, double noise_sd,
                        double keep_prob = 0.85) {
    SimPanel sim;
    sim.n_firms = n_firms;
    sim.n_quarters = n_quarters;
    std::vector<double> firm_effect(n_firms), quarter_effect(n_quarters);
    for (auto& e : firm_effect) e = rng.normal(0.0, 1.0);
    for (auto& e : quarter_effect) e = rng.normal(0.0, 1.0);

    std::vector<std::string> firms, quarters;
    std::vector<std::vector<double>> xs(betas.size());
    std::vector<double> y;
    for (int f = 0; f < n_firms; ++f) {
        for (int q = 0; q < n_quarters; ++q) {
            if (!rng.bernoulli(keep_prob) && !(f < 2)) continue;  // unbalanced
            firms.push_back("F" + std::to_string(f));
            quarters.push_back("Q" + std::to_string(q));
            double value = firm_effect[f] + quarter_effect[q] + noise_sd * rng.normal();
            for (std::size_t j = 0; j < betas.size(); ++j) {
                const double x = rng.normal(0.0, 1.0);
                xs[j].push_back(x);
                value += betas[j] * x;
            }
            y.push_back(value);
        }
    }
    sim.df.add_labels("firm_id", firms);
    sim.df.add_labels("quarter", quarters);
    sim.df.add_numeric("y", y);
    for (std::size_t j = 0; j < betas.size(); ++j)
        sim.df.add_numeric("x" + std::to_string(j), xs[j]);
    return sim;
}

RegressionSpec spec_for(std::size_t k) {
    RegressionSpec spec;
    spec.name = "test";
    spec.dependent = "y";
    for (std::size_t j = 0; j < k; ++j) spec.regressors.push_back("x" + std::to_string(j));
    return spec;
}

// Independent oracle: explicit firm/quarter dummies + intercept, ordinary
// least squares via Eigen's QR on the full design.
std::vector<double> dummy_ols_slopes(const DataFrame& df, std::size_t k) {
    const std::size_t n = df.n;
    std::map<std::string, int> firm_id, quarter_id;
    for (std::size_t i = 0; i < n; ++i) {
        firm_id.try_emplace(df.lab("firm_id")[i], static_cast<int>(firm_id.size()));
        quarter_id.try_emplace(df.lab("quarter")[i], static_cast<int>(quarter_id.size()));
    }
    const std::size_t nf = firm_id.size(), nq = quarter_id.size();
    const std::size_t cols = k + 1 + (nf - 1) + (nq - 1);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, cols);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = df.num("y")[i];
        for (std::size_t j = 0; j < k; ++j)
            X(i, j) = df.num("x" + std::to_string(j))[i];
        X(i, k) = 1.0;
        const int f = firm_id[df.lab("firm_id")[i]];
        const int q = quarter_id[df.lab("quarter")[i]];
        if (f > 0) X(i, k + 1 + (f - 1)) = 1.0;
        if (q > 0) X(i, k + nf + (q - 1)) = 1.0;
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    std::vector<double> slopes(k);
    for (std::size_t j = 0; j < k; ++j) slopes[j] = beta[j];
    return slopes;
}

}  // namespace

TEST_CASE("noiseless planted slope is recovered exactly") {
    Rng rng(1001);
    const SimPanel sim = simulate_panel(rng, 20, 8, {0.5}, 0.0);
    const RegressionResult result = fe_ols(spec_for(1), sim.df);
    CHECK(result.coef_of("x0") == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("within estimator equals explicit-dummy OLS on 25 random panels") {
    Rng rng(2002);
    for (int trial = 0; trial < 25; ++trial) {
        const int n_firms = 3 + static_cast<int>(rng.next_below(48));
        const int n_quarters = 2 + static_cast<int>(rng.next_below(11));
        const std::size_t k = 1 + rng.next_below(3);
        std::vector<double> betas;
        for (std::size_t j = 0; j < k; ++j) betas.push_back(rng.normal(0.0, 1.0));

        const SimPanel sim = simulate_panel(rng, n_firms, n_quarters, betas, 0.3);
        const RegressionResult within = fe_ols(spec_for(k), sim.df);
        const std::vector<double> oracle = dummy_ols_slopes(sim.df, k);
        for (std::size_t j = 0; j < k; ++j)
            CHECK(within.coef_of("x" + std::to_string(j)) ==
                  doctest::Approx(oracle[j]).epsilon(1e-8));
    }
}

TEST_CASE("adding a constant to the dependent changes no slope") {
    Rng rng(3003);
    const SimPanel sim = simulate_panel(rng, 15, 6, {0.8, -0.3}, 0.5);
    const RegressionResult base = fe_ols(spec_for(2), sim.df);

    DataFrame shifted = sim.df;
    auto y = shifted.num("y");
    for (double& v : y) v += 1234.5;
    shifted.numeric["y"] = y;
    const RegressionResult moved = fe_ols(spec_for(2), shifted);
    CHECK(moved.coef_of("x0") == doctest::Approx(base.coef_of("x0")).epsilon(1e-9));
    CHECK(moved.coef_of("x1") == doctest::Approx(base.coef_of("x1")).epsilon(1e-9));
}

TEST_CASE("CR1 with singleton clusters reduces to HC0 times N/(N-K)") {
    // 10 rows, every row its own cluster, no fixed effects
    DataFrame df;
    std::vector<std::string> ids;
    std::vector<double> y, x;
    Rng rng(4004);
    for (int i = 0; i < 10; ++i) {
        ids.push_back("row" + std::to_string(i));
        const double xv = rng.normal(0.0, 1.0);
        x.push_back(xv);
        y.push_back(2.0 * xv + rng.normal(0.0, 0.5));
    }
    df.add_labels("firm_id", ids);
    df.add_labels("quarter", std::vector<std::string>(10, "Q1"));
    df.add_labels("row_id", ids);
    df.add_numeric("y", y);
    df.add_numeric("x0", x);

    RegressionSpec spec = spec_for(1);
    spec.fe_firm = false;
    spec.fe_quarter = false;
    spec.cluster = "row_id";
    const RegressionResult result = fe_ols(spec, df);

    // HC0 by hand: (X'X)^-1 X' diag(e^2) X (X'X)^-1 on [x, 1]
    Eigen::MatrixXd X(10, 2);
    Eigen::VectorXd yv(10);
    for (int i = 0; i < 10; ++i) {
        X(i, 0) = x[i];
        X(i, 1) = 1.0;
        yv[i] = y[i];
    }
    const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * yv);
    const Eigen::VectorXd e = yv - X * beta;
    const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    const Eigen::MatrixXd meat = X.transpose() * e.array().square().matrix().asDiagonal() * X;
    const Eigen::MatrixXd hc0 = bread * meat * bread;

    const double n = 10.0, g = 10.0, kk = 2.0;
    const double factor = (g / (g - 1.0)) * ((n - 1.0) / (n - kk));  // = n/(n-k)
    CHECK(factor == doctest::Approx(n / (n - kk)).epsilon(1e-15));
    const double expected_se_x = std::sqrt(factor * hc0(0, 0));
    const double expected_se_c = std::sqrt(factor * hc0(1, 1));
    CHECK(result.coef_of("x0") == doctest::Approx(beta[0]).epsilon(1e-10));
    CHECK(result.find("x0")->se == doctest::Approx(expected_se_x).epsilon(1e-10));
    CHECK(result.find("const")->se == doctest::Approx(expected_se_c).epsilon(1e-10));
}

TEST_CASE("positive planted NOR loading comes out positive and significant") {
    Rng rng(5005);
    const int n_firms = 40, n_quarters = 8;
    std::vector<std::string> firms, quarters;
    std::vector<double> y, nor;
    std::vector<double> firm_effect(n_firms), quarter_effect(n_quarters);
    for (auto& e : firm_effect) e = rng.normal(0.0, 0.5);
    for (auto& e : quarter_effect) e = rng.normal(0.0, 0.5);
    for (int f = 0; f < n_firms; ++f)
        for (int q = 0; q < n_quarters; ++q) {
            firms.push_back("F" + std::to_string(f));
            quarters.push_back("Q" + std::to_string(q));
            const double n_val = static_cast<double>(rng.next_below(4));
            nor.push_back(n_val);
            y.push_back(0.05 * n_val + firm_effect[f] + quarter_effect[q] +
                        rng.normal(0.0, 0.05));
        }
    DataFrame df;
    df.add_labels("firm_id", firms);
    df.add_labels("quarter", quarters);
    df.add_numeric("y", y);
    df.add_numeric("x0", nor);
    const RegressionResult result = fe_ols(spec_for(1), df);
    CHECK(result.coef_of("x0") > 0.0);
    CHECK(std::abs(result.find("x0")->t) > 2.0);
}

TEST_CASE("interactions multiply the named columns") {
    Rng rng(6006);
    DataFrame df;
    std::vector<std::string> firms, quarters;
    std::vector<double> y, a, b;
    for (int i = 0; i < 400; ++i) {
        firms.push_back("F" + std::to_string(i % 10));
        quarters.push_back("Q" + std::to_string(i % 4));
        const double av = rng.normal(0.0, 1.0), bv = rng.normal(0.0, 1.0);
        a.push_back(av);
        b.push_back(bv);
        y.push_back(1.5 * av * bv + 0.5 * av + rng.normal(0.0, 0.01));
    }
    df.add_labels("firm_id", firms);
    df.add_labels("quarter", quarters);
    df.add_numeric("y", y);
    df.add_numeric("a", a);
    df.add_numeric("b", b);

    RegressionSpec spec;
    spec.name = "interact";
    spec.dependent = "y";
    spec.regressors = {"a", "b"};
    spec.interactions = {{"a", "b"}};
    const RegressionResult result = fe_ols(spec, df);
    CHECK(result.coef_of("a:b") == doctest::Approx(1.5).epsilon(1e-2));
    CHECK(result.coef_of("a") == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("filter restricts the estimation sample") {
    Rng rng(7007);
    DataFrame df;
    std::vector<std::string> firms, quarters;
    std::vector<double> y, x, part;
    for (int i = 0; i < 600; ++i) {
        firms.push_back("F" + std::to_string(i % 20));
        quarters.push_back("Q" + std::to_string(i % 4));
        const double xv = rng.normal(0.0, 1.0);
        const double p = i % 2;
        x.push_back(xv);
        part.push_back(p);
        y.push_back((p == 1.0 ? 2.0 : 0.5) * xv + rng.normal(0.0, 0.01));
    }
    df.add_labels("firm_id", firms);
    df.add_labels("quarter", quarters);
    df.add_numeric("y", y);
    df.add_numeric("x0", x);
    df.add_numeric("part", part);

    RegressionSpec spec = spec_for(1);
    spec.filter = {{"part", 1.0}};
    const RegressionResult ones = fe_ols(spec, df);
    spec.filter = {{"part", 0.0}};
    const RegressionResult zeros = fe_ols(spec, df);
    CHECK(ones.coef_of("x0") == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(zeros.coef_of("x0") == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(ones.n_obs == 300);
}

TEST_CASE("degenerate designs raise typed errors") {
    DataFrame df;
    df.add_labels("firm_id", {"F1", "F1", "F1", "F1"});
    df.add_labels("quarter", {"Q1", "Q2", "Q3", "Q4"});
    df.add_numeric("y", {1.0, 2.0, 3.0, 4.0});
    df.add_numeric("x0", {1.0, 2.0, 3.0, 4.0});
    RegressionSpec spec = spec_for(1);
    CHECK_THROWS_AS(fe_ols(spec, df), TooFewClusters);  // single firm cluster

    DataFrame constant;
    constant.add_labels("firm_id", {"F1", "F2", "F1", "F2", "F1", "F2"});
    constant.add_labels("quarter", {"Q1", "Q1", "Q2", "Q2", "Q3", "Q3"});
    constant.add_numeric("y", {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    constant.add_numeric("x0", {1.0, 1.0, 1.0, 1.0, 1.0, 1.0});  // constant after demeaning
    CHECK_THROWS_AS(fe_ols(spec, constant), SingularDesign);
}

TEST_CASE("missing values drop rows from the sample") {
    DataFrame df;
    df.add_labels("firm_id", {"F1", "F2", "F1", "F2", "F3", "F3"});
    df.add_labels("quarter", {"Q1", "Q1", "Q2", "Q2", "Q1", "Q2"});
    df.add_numeric("y", {1.0, 2.0, kMissing, 4.0, 2.0, 1.0});
    df.add_numeric("x0", {1.0, 2.0, 3.0, kMissing, 1.5, 0.5});
    RegressionSpec spec = spec_for(1);
    spec.fe_firm = false;
    spec.fe_quarter = false;
    const RegressionResult result = fe_ols(spec, df);
    CHECK(result.n_obs == 4);
}
