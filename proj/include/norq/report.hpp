// report.hpp -- human-readable regression tables with significance stars
// (10/5/1 percent) and CSV emission of estimation results.

#ifndef NORQ_REPORT_HPP_
#define NORQ_REPORT_HPP_

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "norq/csv.hpp"
#include "norq/stats/fe_ols.hpp"

namespace norq {

inline std::string stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

inline std::string fmt_fixed(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// One column per result, rows are coefficients (coef with stars, t below).
inline std::string regression_table(const std::string& title,
                                    const std::vector<stats::RegressionResult>& results,
                                    const std::vector<std::string>& row_order,
                                    int decimals = 4) {
    std::string out = title + "\n";
    out += std::string(title.size(), '=') + "\n\n";

    const std::size_t name_width = 22;
    auto pad = [](std::string s, std::size_t width) {
        if (s.size() < width) s += std::string(width - s.size(), ' ');
        return s;
    };
    const std::size_t col_width = 18;

    out += pad("", name_width);
    for (std::size_t i = 0; i < results.size(); ++i)
        out += pad("(" + std::to_string(i + 1) + ") " + results[i].dependent, col_width);
    out += "\n";

    for (const std::string& name : row_order) {
        bool any = false;
        for (const auto& r : results)
            if (r.find(name)) any = true;
        if (!any) continue;
        std::string coef_line = pad(name, name_width);
        std::string t_line = pad("", name_width);
        for (const auto& r : results) {
            const stats::CoefEntry* e = r.find(name);
            coef_line += pad(e ? fmt_fixed(e->coef, decimals) + stars(e->p) : "", col_width);
            t_line += pad(e ? "(" + fmt_fixed(e->t, 2) + ")" : "", col_width);
        }
        out += coef_line + "\n" + t_line + "\n";
    }

    out += pad("Observations", name_width);
    for (const auto& r : results) out += pad(std::to_string(r.n_obs), col_width);
    out += "\n";
    std::string fit_label = "Adj. R2";
    for (const auto& r : results)
        if (r.estimator == "logit") fit_label = "Pse./Adj. R2";
    out += pad(fit_label, name_width);
    for (const auto& r : results)
        out += pad(fmt_fixed(r.estimator == "logit" ? r.pseudo_r2 : r.adj_r2, 3), col_width);
    out += "\n";
    return out;
}

inline void write_results_csv(const std::string& path,
                              const std::vector<stats::RegressionResult>& results) {
    CsvWriter out(path);
    out.row({"spec", "estimator", "dependent", "term", "coef", "se", "t", "p", "n_obs",
             "n_clusters", "r2", "adj_r2", "pseudo_r2"});
    for (const auto& r : results)
        for (const auto& e : r.coefficients)
            out.row({r.spec_name, r.estimator, r.dependent, e.name, fmt_double(e.coef),
                     fmt_double(e.se), fmt_double(e.t), fmt_double(e.p),
                     std::to_string(r.n_obs), std::to_string(r.n_clusters),
                     fmt_double(r.r2), fmt_double(r.adj_r2), fmt_double(r.pseudo_r2)});
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

}  // namespace norq

#endif  // NORQ_REPORT_HPP_
