// logit.hpp -- maximum-likelihood logistic regression via damped Newton.
//
// Fixed effects are not absorbed here; when the spec asks for them they
// enter as explicit dummy columns (drop-first), which keeps the estimator
// honest at desk scale. Separation is flagged when coefficients diverge.
// Reported SEs come from the observed information; a cluster column
// switches them to the CR1 sandwich. Pseudo R-squared is the likelihood
// ratio form 1 - ll/ll0.

#ifndef NORQ_STATS_LOGIT_HPP_
#define NORQ_STATS_LOGIT_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "norq/errors.hpp"
#include "norq/stats/fe_ols.hpp"

namespace norq::stats {

struct LogitOptions {
    double gradient_tol = 1e-10;  // scaled by max(1, n/100)
    int max_iterations = 100;
    double separation_bound = 1e3;  // |beta| beyond this means separation
    bool cluster_se = true;         // use spec.cluster for sandwich SEs
};

inline RegressionResult logit(const RegressionSpec& spec, const DataFrame& df,
                              const LogitOptions& options = {}) {
    const auto rows = detail::usable_rows(spec, df);
    const std::size_t n = rows.size();
    if (n == 0) throw SingularDesign(spec.name + ": empty sample");

    const auto& y_col = df.num(spec.dependent);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = y_col[rows[i]];
        if (v != 0.0 && v != 1.0)
            throw SingularDesign(spec.name + ": dependent must be binary for logit");
        y[static_cast<Eigen::Index>(i)] = v;
    }

    // design: intercept, regressors, interactions, then optional FE dummies
    std::vector<std::string> names = {"const"};
    for (const auto& r : spec.regressors) names.push_back(r);
    for (const auto& [a, b] : spec.interactions) names.push_back(a + ":" + b);

    std::vector<std::vector<double>> dummy_columns;
    auto add_dummies = [&](const std::vector<std::string>& labels, const std::string& tag) {
        std::map<std::string, int> groups;
        for (const std::size_t r : rows) groups.try_emplace(labels[r], 0);
        int next = 0;
        for (auto& [key, id] : groups) id = next++;
        // drop-first coding
        for (const auto& [key, id] : groups) {
            if (id == 0) continue;
            std::vector<double> column(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (labels[rows[i]] == key) column[i] = 1.0;
            dummy_columns.push_back(std::move(column));
            names.push_back(tag + "=" + key);
        }
    };
    if (spec.fe_firm) add_dummies(df.lab(spec.firm_label), spec.firm_label);
    if (spec.fe_quarter) add_dummies(df.lab(spec.quarter_label), spec.quarter_label);

    const std::size_t k = names.size();
    if (n <= k) throw SingularDesign(spec.name + ": too few rows for logit design");
    Eigen::MatrixXd X(n, k);
    {
        for (std::size_t i = 0; i < n; ++i) X(static_cast<Eigen::Index>(i), 0) = 1.0;
        std::size_t j = 1;
        for (const auto& r : spec.regressors) {
            const auto& col = df.num(r);
            for (std::size_t i = 0; i < n; ++i)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[rows[i]];
            ++j;
        }
        for (const auto& [a, b] : spec.interactions) {
            const auto& ca = df.num(a);
            const auto& cb = df.num(b);
            for (std::size_t i = 0; i < n; ++i)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    ca[rows[i]] * cb[rows[i]];
            ++j;
        }
        for (const auto& column : dummy_columns) {
            for (std::size_t i = 0; i < n; ++i)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = column[i];
            ++j;
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(k))
        throw SingularDesign(spec.name + ": logit design is rank-deficient");

    auto log_likelihood = [&](const Eigen::VectorXd& eta) {
        double ll = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double e = eta[i];
            // log(1 + exp(e)) without overflow
            const double softplus = e > 30.0 ? e : std::log1p(std::exp(e));
            ll += y[i] * e - softplus;
        }
        return ll;
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    Eigen::VectorXd eta = X * beta;
    double ll = log_likelihood(eta);
    const double tol = options.gradient_tol * std::max(1.0, static_cast<double>(n) / 100.0);

    // separated data: every observation classified correctly with a wide
    // margin, so the likelihood keeps climbing as |beta| diverges
    auto is_separated = [&]() {
        if (beta.cwiseAbs().maxCoeff() < 5.0) return false;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double margin = (2.0 * y[i] - 1.0) * eta[i];
            if (margin <= 0.0) return false;
        }
        return true;
    };

    bool converged = false;
    Eigen::MatrixXd hessian(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        Eigen::VectorXd p(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double pi = 1.0 / (1.0 + std::exp(-eta[i]));
            p[i] = pi;
            w[i] = std::max(pi * (1.0 - pi), 1e-10);
        }
        const Eigen::VectorXd gradient = X.transpose() * (y - p);
        if (gradient.cwiseAbs().maxCoeff() < tol) {
            converged = true;
            hessian = X.transpose() * w.asDiagonal() * X;
            break;
        }
        hessian = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd direction = hessian.ldlt().solve(gradient);

        // damped step: halve until the likelihood improves
        double step = 1.0;
        while (step > 1e-12) {
            const Eigen::VectorXd candidate = beta + step * direction;
            const Eigen::VectorXd candidate_eta = X * candidate;
            const double candidate_ll = log_likelihood(candidate_eta);
            if (candidate_ll >= ll - 1e-12) {
                beta = candidate;
                eta = candidate_eta;
                ll = candidate_ll;
                break;
            }
            step *= 0.5;
        }
        if (beta.cwiseAbs().maxCoeff() > options.separation_bound || is_separated())
            throw Separation(spec.name + ": coefficients diverged (separated data)");
        if (step <= 1e-12) break;  // stalled; gradient check decides below
    }
    if (!converged) {
        if (is_separated())
            throw Separation(spec.name + ": coefficients diverged (separated data)");
        Eigen::VectorXd p(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            p[i] = 1.0 / (1.0 + std::exp(-eta[i]));
        const Eigen::VectorXd gradient = X.transpose() * (y - p);
        if (gradient.cwiseAbs().maxCoeff() >= tol)
            throw NonConvergence(spec.name + ": logit did not converge");
        converged = true;
    }

    // null model for the pseudo R-squared
    const double mean_y = y.mean();
    double ll0 = 0.0;
    if (mean_y > 0.0 && mean_y < 1.0)
        ll0 = static_cast<double>(n) *
              (mean_y * std::log(mean_y) + (1.0 - mean_y) * std::log(1.0 - mean_y));

    // covariance
    const Eigen::MatrixXd info_inv = hessian.ldlt().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                  static_cast<Eigen::Index>(k)));
    Eigen::MatrixXd vcov = info_inv;
    int n_clusters = 0;
    if (options.cluster_se && !spec.cluster.empty()) {
        const std::vector<int> cluster =
            detail::group_index(df.lab(spec.cluster), rows, n_clusters);
        if (n_clusters >= 2) {
            Eigen::VectorXd p(eta.size());
            for (Eigen::Index i = 0; i < eta.size(); ++i)
                p[i] = 1.0 / (1.0 + std::exp(-eta[i]));
            Eigen::MatrixXd scores =
                Eigen::MatrixXd::Zero(n_clusters, static_cast<Eigen::Index>(k));
            for (std::size_t i = 0; i < n; ++i)
                scores.row(cluster[i]) += (y[static_cast<Eigen::Index>(i)] -
                                           p[static_cast<Eigen::Index>(i)]) *
                                          X.row(static_cast<Eigen::Index>(i));
            const double g = static_cast<double>(n_clusters);
            const double factor = g / (g - 1.0);
            vcov = factor * info_inv * (scores.transpose() * scores) * info_inv;
        }
    }

    RegressionResult result;
    result.spec_name = spec.name;
    result.dependent = spec.dependent;
    result.estimator = "logit";
    result.n_obs = n;
    result.n_clusters = static_cast<std::size_t>(n_clusters);
    result.pseudo_r2 = ll0 < 0.0 ? 1.0 - ll / ll0 : 0.0;
    const double dof = n_clusters >= 2 ? static_cast<double>(n_clusters - 1)
                                       : static_cast<double>(n - k);
    for (std::size_t j = 0; j < k; ++j) {
        CoefEntry e;
        e.name = names[j];
        e.coef = beta[static_cast<Eigen::Index>(j)];
        e.se = std::sqrt(std::max(0.0, vcov(static_cast<Eigen::Index>(j),
                                            static_cast<Eigen::Index>(j))));
        e.t = e.se > 0.0 ? e.coef / e.se : 0.0;
        e.p = detail::t_pvalue(e.t, dof);
        result.coefficients.push_back(std::move(e));
    }
    return result;
}

}  // namespace norq::stats

#endif  // NORQ_STATS_LOGIT_HPP_
