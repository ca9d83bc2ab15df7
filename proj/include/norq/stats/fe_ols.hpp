// fe_ols.hpp -- two-way fixed-effects OLS with cluster-robust errors.
//
// Firm and quarter effects are absorbed by alternating demeaning to
// convergence (sup-norm of group means below 1e-10 relative to column
// scale, at most 200 sweeps), which equals explicit-dummy OLS at the
// reported tolerance. Covariance is CR1:
//
//   V = c * (X'X)^-1 [ sum_g (X_g'e_g)(X_g'e_g)' ] (X'X)^-1,
//   c = G/(G-1) * (N-1)/(N-K),
//
// with K counting slopes plus absorbed fixed-effect degrees of freedom.
// With singleton clusters the estimator reduces to HC0 scaled by N/(N-K).
// t statistics use G-1 degrees of freedom. Adjusted R-squared is computed
// on the untransformed dependent variable with absorbed effects counted
// in K.

#ifndef NORQ_STATS_FE_OLS_HPP_
#define NORQ_STATS_FE_OLS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "norq/errors.hpp"
#include "norq/stats/dataframe.hpp"

namespace norq::stats {

struct RegressionSpec {
    std::string name;
    std::string dependent;
    std::vector<std::string> regressors;
    std::vector<std::pair<std::string, std::string>> interactions;
    bool fe_firm = true;
    bool fe_quarter = true;
    std::string firm_label = "firm_id";
    std::string quarter_label = "quarter";
    std::string cluster = "firm_id";
    std::optional<std::pair<std::string, double>> filter;  // column == value

    std::vector<std::string> design_names() const {
        std::vector<std::string> names = regressors;
        for (const auto& [a, b] : interactions) names.push_back(a + ":" + b);
        return names;
    }
};

struct CoefEntry {
    std::string name;
    double coef = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p = 1.0;
};

struct RegressionResult {
    std::string spec_name;
    std::string dependent;
    std::string estimator;  // "fe_ols" | "ols" | "logit"
    std::vector<CoefEntry> coefficients;
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double pseudo_r2 = 0.0;  // logit only
    int sweeps = 0;          // within-transform iterations

    const CoefEntry* find(const std::string& name) const {
        for (const auto& c : coefficients)
            if (c.name == name) return &c;
        return nullptr;
    }

    double coef_of(const std::string& name) const {
        const CoefEntry* e = find(name);
        if (!e) throw Error("no coefficient '" + name + "' in " + spec_name);
        return e->coef;
    }
};

namespace detail {

// Rows usable for the spec: filter passes and every needed value is finite.
inline std::vector<std::size_t> usable_rows(const RegressionSpec& spec, const DataFrame& df) {
    std::vector<const std::vector<double>*> needed;
    needed.push_back(&df.num(spec.dependent));
    for (const auto& r : spec.regressors) needed.push_back(&df.num(r));
    for (const auto& [a, b] : spec.interactions) {
        needed.push_back(&df.num(a));
        needed.push_back(&df.num(b));
    }
    const std::vector<double>* filter_col = nullptr;
    if (spec.filter) filter_col = &df.num(spec.filter->first);

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < df.n; ++i) {
        bool ok = true;
        for (const auto* col : needed)
            if (!std::isfinite((*col)[i])) { ok = false; break; }
        if (ok && filter_col) {
            const double v = (*filter_col)[i];
            ok = std::isfinite(v) && std::abs(v - spec.filter->second) < 1e-9;
        }
        if (ok) rows.push_back(i);
    }
    return rows;
}

inline std::vector<int> group_index(const std::vector<std::string>& labels,
                                    const std::vector<std::size_t>& rows, int& n_groups) {
    std::map<std::string, int> ids;
    std::vector<int> index(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto [it, inserted] = ids.try_emplace(labels[rows[k]],
                                                    static_cast<int>(ids.size()));
        index[k] = it->second;
    }
    n_groups = static_cast<int>(ids.size());
    return index;
}

// Alternating within-transform on y and the columns of X. Returns sweeps.
inline int demean_two_way(Eigen::VectorXd& y, Eigen::MatrixXd& X,
                          const std::vector<int>& firm, int n_firms,
                          const std::vector<int>& quarter, int n_quarters,
                          double tol = 1e-10, int max_sweeps = 200) {
    const auto n = y.size();
    const double scale = std::max(1.0, std::max(y.cwiseAbs().maxCoeff(),
                                                X.size() > 0 ? X.cwiseAbs().maxCoeff() : 0.0));
    Eigen::VectorXd firm_count = Eigen::VectorXd::Zero(n_firms);
    Eigen::VectorXd quarter_count = Eigen::VectorXd::Zero(n_quarters);
    for (Eigen::Index i = 0; i < n; ++i) {
        firm_count[firm[static_cast<std::size_t>(i)]] += 1.0;
        quarter_count[quarter[static_cast<std::size_t>(i)]] += 1.0;
    }

    auto sweep_factor = [&](const std::vector<int>& index, const Eigen::VectorXd& counts,
                            int n_groups) {
        double worst = 0.0;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_groups, X.cols() + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int g = index[static_cast<std::size_t>(i)];
            sums(g, 0) += y[i];
            for (Eigen::Index j = 0; j < X.cols(); ++j) sums(g, j + 1) += X(i, j);
        }
        for (int g = 0; g < n_groups; ++g) sums.row(g) /= counts[g];
        for (Eigen::Index i = 0; i < n; ++i) {
            const int g = index[static_cast<std::size_t>(i)];
            y[i] -= sums(g, 0);
            for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) -= sums(g, j + 1);
        }
        worst = sums.cwiseAbs().maxCoeff();
        return worst;
    };

    int sweeps = 0;
    while (sweeps < max_sweeps) {
        ++sweeps;
        const double moved_firm = sweep_factor(firm, firm_count, n_firms);
        const double moved_quarter = sweep_factor(quarter, quarter_count, n_quarters);
        if (std::max(moved_firm, moved_quarter) < tol * scale) break;
    }
    return sweeps;
}

inline double t_pvalue(double t, double dof) {
    if (!(dof > 0.0) || !std::isfinite(t)) return 1.0;
    const boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace detail

// Estimates the spec on an explicit row subset (the permutation test uses
// this to avoid copying the frame).
inline RegressionResult fe_ols_rows(const RegressionSpec& spec, const DataFrame& df,
                                    const std::vector<std::size_t>& rows) {
    const std::size_t n = rows.size();
    const auto names = spec.design_names();
    const std::size_t k = names.size();
    if (n == 0 || n <= k) throw SingularDesign(spec.name + ": too few usable rows");

    // cluster structure first: the estimator requires >= 2 clusters
    int n_clusters = 0;
    const std::vector<int> cluster =
        detail::group_index(df.lab(spec.cluster), rows, n_clusters);
    if (n_clusters < 2) throw TooFewClusters(spec.name + ": need >= 2 clusters");

    // assemble y and X
    const auto& y_col = df.num(spec.dependent);
    Eigen::VectorXd y(n);
    Eigen::VectorXd y_orig(n);
    for (std::size_t i = 0; i < n; ++i) y[static_cast<Eigen::Index>(i)] = y_col[rows[i]];
    y_orig = y;

    const bool with_intercept = !spec.fe_firm && !spec.fe_quarter;
    const std::size_t k_design = k + (with_intercept ? 1 : 0);
    Eigen::MatrixXd X(n, k_design);
    {
        std::size_t j = 0;
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
        if (with_intercept)
            for (std::size_t i = 0; i < n; ++i)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    }

    // absorb fixed effects
    int n_firms = 0, n_quarters = 0;
    int sweeps = 0;
    std::size_t absorbed_dof = with_intercept ? 0 : 1;  // shared grand intercept
    if (spec.fe_firm && spec.fe_quarter) {
        const auto firm = detail::group_index(df.lab(spec.firm_label), rows, n_firms);
        const auto quarter = detail::group_index(df.lab(spec.quarter_label), rows, n_quarters);
        sweeps = detail::demean_two_way(y, X, firm, n_firms, quarter, n_quarters);
        absorbed_dof = 1 + static_cast<std::size_t>(n_firms - 1) +
                       static_cast<std::size_t>(n_quarters - 1);
    } else if (spec.fe_firm || spec.fe_quarter) {
        const auto& label = spec.fe_firm ? df.lab(spec.firm_label) : df.lab(spec.quarter_label);
        int n_groups = 0;
        const auto index = detail::group_index(label, rows, n_groups);
        std::vector<int> trivial(n, 0);
        sweeps = detail::demean_two_way(y, X, index, n_groups, trivial, 1);
        absorbed_dof = static_cast<std::size_t>(n_groups);
    }

    // OLS on the transformed data
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(k_design))
        throw SingularDesign(spec.name + ": design is rank-deficient after demeaning");
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd residual = y - X * beta;

    const std::size_t k_total = k_design + absorbed_dof;
    if (n <= k_total) throw SingularDesign(spec.name + ": no residual degrees of freedom");

    // CR1 cluster-robust covariance
    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(
            static_cast<Eigen::Index>(k_design), static_cast<Eigen::Index>(k_design)));
    Eigen::MatrixXd meat =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k_design),
                              static_cast<Eigen::Index>(k_design));
    {
        Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(
            n_clusters, static_cast<Eigen::Index>(k_design));
        for (std::size_t i = 0; i < n; ++i)
            scores.row(cluster[i]) +=
                residual[static_cast<Eigen::Index>(i)] * X.row(static_cast<Eigen::Index>(i));
        meat = scores.transpose() * scores;
    }
    const double g = static_cast<double>(n_clusters);
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k_total);
    const double small_sample = (g / (g - 1.0)) * ((nn - 1.0) / (nn - kk));
    const Eigen::MatrixXd vcov = small_sample * xtx_inv * meat * xtx_inv;

    // fit statistics on the untransformed dependent variable
    const double y_mean = y_orig.mean();
    const double sst = (y_orig.array() - y_mean).square().sum();
    const double ssr = residual.squaredNorm();
    const double r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    const double adj_r2 =
        sst > 0.0 ? 1.0 - (1.0 - r2) * (nn - 1.0) / (nn - kk) : 0.0;

    RegressionResult result;
    result.spec_name = spec.name;
    result.dependent = spec.dependent;
    result.estimator = (spec.fe_firm || spec.fe_quarter) ? "fe_ols" : "ols";
    result.n_obs = n;
    result.n_clusters = static_cast<std::size_t>(n_clusters);
    result.r2 = r2;
    result.adj_r2 = adj_r2;
    result.sweeps = sweeps;
    std::vector<std::string> all_names = names;
    if (with_intercept) all_names.push_back("const");
    for (std::size_t j = 0; j < k_design; ++j) {
        CoefEntry e;
        e.name = all_names[j];
        e.coef = beta[static_cast<Eigen::Index>(j)];
        e.se = std::sqrt(std::max(0.0, vcov(static_cast<Eigen::Index>(j),
                                            static_cast<Eigen::Index>(j))));
        e.t = e.se > 0.0 ? e.coef / e.se : 0.0;
        e.p = detail::t_pvalue(e.t, g - 1.0);
        result.coefficients.push_back(std::move(e));
    }
    return result;
}

inline RegressionResult fe_ols(const RegressionSpec& spec, const DataFrame& df) {
    return fe_ols_rows(spec, df, detail::usable_rows(spec, df));
}

}  // namespace norq::stats

#endif  // NORQ_STATS_FE_OLS_HPP_
