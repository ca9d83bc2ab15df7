#include <doctest.h>

#include "norq/stats/logit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "norq/rng.hpp"

using namespace norq;
using namespace norq::stats;

namespace {

DataFrame simulate_logit(Rng& rng, int n, const std::vector<double>& betas,
                         double intercept) {
    DataFrame df;
    std::vector<std::string> firms, quarters;
    std::vector<std::vector<double>> xs(betas.size());
    std::vector<double> y;
    for (int i = 0; i < n; ++i) {
        firms.push_back("F" + std::to_string(i % 8));
        quarters.push_back("Q" + std::to_string(i % 4));
        double eta = intercept;
        for (std::size_t j = 0; j < betas.size(); ++j) {
            const double x = rng.normal(0.0, 1.0);
            xs[j].push_back(x);
            eta += betas[j] * x;
        }
        const double p = 1.0 / (1.0 + std::exp(-eta));
        y.push_back(rng.bernoulli(p) ? 1.0 : 0.0);
    }
    df.add_labels("firm_id", firms);
    df.add_labels("quarter", quarters);
    df.add_numeric("y", y);
    for (std::size_t j = 0; j < betas.size(); ++j)
        df.add_numeric("x" + std::to_string(j), xs[j]);
    return df;
}

RegressionSpec logit_spec(std::size_t k, bool fe = false) {
    RegressionSpec spec;
    spec.name = "logit_test";
    spec.dependent = "y";
    for (std::size_t j = 0; j < k; ++j) spec.regressors.push_back("x" + std::to_string(j));
    spec.fe_firm = fe;
    spec.fe_quarter = fe;
    return spec;
}

// Independent IRLS oracle: beta <- (X'WX)^-1 X'W z, z = eta + (y-p)/w.
std::vector<double> irls_oracle(const DataFrame& df, std::size_t k) {
    const std::size_t n = df.n;
    Eigen::MatrixXd X(n, k + 1);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) X(i, j + 1) = df.num("x" + std::to_string(j))[i];
        y[i] = df.num("y")[i];
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k + 1);
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXd eta = X * beta;
        Eigen::VectorXd w(n), z(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-eta[i]));
            const double wi = std::max(p * (1.0 - p), 1e-10);
            w[i] = wi;
            z[i] = eta[i] + (y[i] - p) / wi;
        }
        const Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd next = xtwx.ldlt().solve(X.transpose() * (w.asDiagonal() * z));
        const double move = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (move < 1e-12) break;
    }
    std::vector<double> out(k + 1);
    for (std::size_t j = 0; j <= k; ++j) out[j] = beta[j];
    return out;
}

}  // namespace

TEST_CASE("balanced data with no signal fits an intercept-only model") {
    Rng rng(11);
    DataFrame df = simulate_logit(rng, 2000, {0.0}, 0.0);
    const RegressionResult result = logit(logit_spec(1), df);
    CHECK(std::abs(result.coef_of("x0")) < 0.15);
    CHECK(std::abs(result.coef_of("const")) < 0.15);
    CHECK(result.pseudo_r2 < 0.01);
}

TEST_CASE("logit agrees with the IRLS oracle to 1e-6") {
    Rng rng(22);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t k = 1 + rng.next_below(3);
        std::vector<double> betas;
        for (std::size_t j = 0; j < k; ++j) betas.push_back(rng.normal(0.0, 0.8));
        DataFrame df = simulate_logit(rng, 400 + static_cast<int>(rng.next_below(400)),
                                      betas, 0.3);
        const RegressionResult fit = logit(logit_spec(k), df);
        const std::vector<double> oracle = irls_oracle(df, k);
        CHECK(fit.coef_of("const") == doctest::Approx(oracle[0]).epsilon(1e-6));
        for (std::size_t j = 0; j < k; ++j)
            CHECK(fit.coef_of("x" + std::to_string(j)) ==
                  doctest::Approx(oracle[j + 1]).epsilon(1e-6));
    }
}

TEST_CASE("perfectly separated data raises Separation") {
    DataFrame df;
    std::vector<std::string> firms, quarters;
    std::vector<double> y, x;
    for (int i = 0; i < 60; ++i) {
        firms.push_back("F" + std::to_string(i % 4));
        quarters.push_back("Q1");
        const double xv = i < 30 ? -1.0 - 0.01 * i : 1.0 + 0.01 * i;
        x.push_back(xv);
        y.push_back(xv > 0.0 ? 1.0 : 0.0);
    }
    df.add_labels("firm_id", firms);
    df.add_labels("quarter", quarters);
    df.add_numeric("y", y);
    df.add_numeric("x0", x);
    CHECK_THROWS_AS(logit(logit_spec(1), df), Separation);
}

TEST_CASE("known coefficients are recovered on a large simulated sample") {
    Rng rng(33);
    DataFrame df = simulate_logit(rng, 20000, {1.2, -0.7}, 0.4);
    const RegressionResult result = logit(logit_spec(2), df);
    CHECK(result.coef_of("x0") == doctest::Approx(1.2).epsilon(0.08));
    CHECK(result.coef_of("x1") == doctest::Approx(-0.7).epsilon(0.12));
    CHECK(result.coef_of("const") == doctest::Approx(0.4).epsilon(0.2));
    CHECK(result.pseudo_r2 > 0.1);
}

TEST_CASE("explicit dummy fixed effects shift group intercepts") {
    Rng rng(44);
    // firm 0 has a much higher base rate; FE should absorb it
    DataFrame df;
    std::vector<std::string> firms, quarters;
    std::vector<double> y, x;
    for (int i = 0; i < 4000; ++i) {
        const int f = i % 4;
        firms.push_back("F" + std::to_string(f));
        quarters.push_back("Q" + std::to_string((i / 4) % 4));
        const double xv = rng.normal(0.0, 1.0);
        x.push_back(xv);
        const double eta = 0.8 * xv + (f == 0 ? 1.5 : 0.0);
        y.push_back(rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1.0 : 0.0);
    }
    df.add_labels("firm_id", firms);
    df.add_labels("quarter", quarters);
    df.add_numeric("y", y);
    df.add_numeric("x0", x);
    const RegressionResult fit = logit(logit_spec(1, true), df);
    CHECK(fit.coef_of("x0") == doctest::Approx(0.8).epsilon(0.15));
    CHECK(fit.find("firm_id=F1") != nullptr);  // dummies present (drop-first)
    CHECK(fit.coefficients.size() == 1 + 1 + 3 + 3);
}

TEST_CASE("non-binary dependent is rejected") {
    DataFrame df;
    df.add_labels("firm_id", {"F1", "F2", "F1", "F2"});
    df.add_labels("quarter", {"Q1", "Q1", "Q2", "Q2"});
    df.add_numeric("y", {0.0, 1.0, 2.0, 1.0});
    df.add_numeric("x0", {0.1, 0.4, 0.2, 0.9});
    CHECK_THROWS_AS(logit(logit_spec(1), df), SingularDesign);
}
