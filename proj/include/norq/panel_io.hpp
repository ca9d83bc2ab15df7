// panel_io.hpp -- the panel's named-column view: winsorization pass,
// panel.csv / individual_panel.csv writers and readers.
//
// The field table is the single source of truth for column names, order,
// and which columns count as continuous (winsorized); the regression
// stage reads the same names back out of panel.csv.

#ifndef NORQ_PANEL_IO_HPP_
#define NORQ_PANEL_IO_HPP_

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "norq/csv.hpp"
#include "norq/panel.hpp"

namespace norq {

struct PanelField {
    std::string name;
    std::function<std::optional<double>(const PanelRow&)> get;
    std::function<void(PanelRow&, double)> set;
    bool continuous = false;  // winsorized
};

inline const std::vector<PanelField>& panel_fields() {
    static const std::vector<PanelField> fields = [] {
        std::vector<PanelField> f;
        auto add_double = [&f](const std::string& name, double PanelRow::* member,
                               bool continuous) {
            f.push_back({name,
                         [member](const PanelRow& r) -> std::optional<double> {
                             return r.*member;
                         },
                         [member](PanelRow& r, double v) { r.*member = v; }, continuous});
        };
        auto add_int = [&f](const std::string& name, int PanelRow::* member) {
            f.push_back({name,
                         [member](const PanelRow& r) -> std::optional<double> {
                             return static_cast<double>(r.*member);
                         },
                         [member](PanelRow& r, double v) { r.*member = static_cast<int>(v); },
                         false});
        };
        auto add_opt = [&f](const std::string& name,
                            std::optional<double> PanelRow::* member, bool continuous) {
            f.push_back({name,
                         [member](const PanelRow& r) -> std::optional<double> {
                             return r.*member;
                         },
                         [member](PanelRow& r, double v) { r.*member = v; }, continuous});
        };
        auto add_category = [&f](const std::string& name, NorCategory cat) {
            f.push_back({name,
                         [cat](const PanelRow& r) -> std::optional<double> {
                             const auto it = r.category_counts.find(cat);
                             return it == r.category_counts.end()
                                        ? 0.0
                                        : static_cast<double>(it->second);
                         },
                         [cat](PanelRow& r, double v) {
                             r.category_counts[cat] = static_cast<int>(v);
                         },
                         false});
        };

        add_int("nor_firm", &PanelRow::nor_firm);
        add_int("nor_f", &PanelRow::nor_f);
        add_category("refusal", NorCategory::Refusal);
        add_category("lack", NorCategory::LackOfInfo);
        add_category("legal", NorCategory::LegalAffairs);
        add_category("recall", NorCategory::Recall);
        add_category("irrelevant", NorCategory::Irrelevant);
        add_category("other_cat", NorCategory::Other);
        add_double("mscore", &PanelRow::mscore, true);
        add_double("quantity", &PanelRow::quantity, true);
        add_double("relevance", &PanelRow::relevance, true);
        add_double("clarity", &PanelRow::clarity, true);
        add_double("error_firm", &PanelRow::error_firm, true);
        add_opt("dispersion_firm", &PanelRow::dispersion_firm, true);
        add_opt("uncertainty_firm", &PanelRow::uncertainty_firm, true);
        add_double("squ_error_firm", &PanelRow::squ_error_firm, true);
        add_opt("squ_uncertainty_firm", &PanelRow::squ_uncertainty_firm, true);
        add_int("analyst_following", &PanelRow::analyst_following);
        add_double("sur_ear", &PanelRow::sur_ear, true);
        add_double("size", &PanelRow::size, true);
        add_double("roa", &PanelRow::roa, true);
        add_double("ret_vol", &PanelRow::ret_vol, true);
        add_int("loss", &PanelRow::loss);
        add_double("mkv", &PanelRow::mkv, true);
        add_double("lev", &PanelRow::lev, true);
        add_double("tone", &PanelRow::tone, true);
        add_double("uncert", &PanelRow::uncert, true);
        add_double("forward", &PanelRow::forward, true);
        add_double("read", &PanelRow::read, true);
        add_double("rd_exp", &PanelRow::rd_exp, true);
        add_opt("bm", &PanelRow::bm, true);
        add_double("num_ana", &PanelRow::num_ana, true);
        add_opt("wt_ret", &PanelRow::wt_ret, true);
        add_int("mo", &PanelRow::mo);
        add_int("inst", &PanelRow::inst);
        add_int("h_rd", &PanelRow::h_rd);
        add_int("covid", &PanelRow::covid);
        add_opt("comp", &PanelRow::comp, true);
        add_opt("lwealth", &PanelRow::lwealth, true);
        add_opt("car_2_60", &PanelRow::car_2_60, true);
        add_opt("bhar_2_60", &PanelRow::bhar_2_60, true);
        add_opt("ret_sd", &PanelRow::ret_sd, true);
        add_opt("volume", &PanelRow::volume, true);
        add_opt("volume_raw", &PanelRow::volume_raw, true);
        add_opt("spread", &PanelRow::spread, true);
        add_opt("qr_ueps", &PanelRow::qr_ueps, false);
        return f;
    }();
    return fields;
}

// Winsorizes every continuous column in place. Pooled across quarters by
// default; per-quarter clamping sits behind the flag.
inline void winsorize_panel(std::vector<PanelRow>& rows, double lower = 0.01,
                            double upper = 0.99, bool per_quarter = false) {
    auto clamp_group = [&](const std::vector<std::size_t>& index) {
        for (const PanelField& field : panel_fields()) {
            if (!field.continuous) continue;
            std::vector<double> present;
            std::vector<std::size_t> where;
            for (const std::size_t i : index) {
                if (const auto v = field.get(rows[i])) {
                    present.push_back(*v);
                    where.push_back(i);
                }
            }
            if (present.size() < 2) continue;
            const double lo = percentile_interp(present, lower);
            const double hi = percentile_interp(present, upper);
            for (std::size_t k = 0; k < where.size(); ++k)
                field.set(rows[where[k]], std::clamp(present[k], lo, hi));
        }
    };

    if (!per_quarter) {
        std::vector<std::size_t> all(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) all[i] = i;
        clamp_group(all);
        return;
    }
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i)
        groups[rows[i].quarter.index].push_back(i);
    for (const auto& [q, index] : groups) clamp_group(index);
}

inline void winsorize_individual(std::vector<IndividualRow>& rows, double lower = 0.01,
                                 double upper = 0.99) {
    for (auto field : {&IndividualRow::error_individual, &IndividualRow::time_individual}) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& r : rows) values.push_back(r.*field);
        if (values.size() < 2) continue;
        const double lo = percentile_interp(values, lower);
        const double hi = percentile_interp(values, upper);
        for (auto& r : rows) r.*field = std::clamp(r.*field, lo, hi);
    }
}

// --- CSV ---------------------------------------------------------------------

inline void write_panel_csv(const std::string& path, const std::vector<PanelRow>& rows) {
    CsvWriter out(path);
    std::vector<std::string> header = {"firm_id", "quarter", "transcript_id",
                                       "announcement_date", "n_exchanges", "n_errors"};
    for (const PanelField& f : panel_fields()) header.push_back(f.name);
    out.row(header);
    for (const PanelRow& r : rows) {
        std::vector<std::string> line = {r.firm_id, r.quarter.str(), r.transcript_id,
                                         r.announcement_date.str(),
                                         std::to_string(r.n_exchanges),
                                         std::to_string(r.n_errors)};
        for (const PanelField& f : panel_fields()) {
            const auto v = f.get(r);
            line.push_back(v ? fmt_double(*v) : "");
        }
        out.row(line);
    }
}

inline std::vector<PanelRow> read_panel_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    std::vector<PanelRow> rows;
    const auto firm = t.col("firm_id"), quarter = t.col("quarter");
    const auto transcript = t.col("transcript_id"), announce = t.col("announcement_date");
    const auto n_ex = t.col("n_exchanges"), n_err = t.col("n_errors");
    for (const auto& raw : t.rows) {
        PanelRow r;
        r.firm_id = raw[firm];
        r.quarter = Quarter::parse(raw[quarter]);
        r.transcript_id = raw[transcript];
        r.announcement_date = Date::parse(raw[announce]);
        r.n_exchanges = static_cast<std::size_t>(parse_long(raw[n_ex]));
        r.n_errors = static_cast<std::size_t>(parse_long(raw[n_err]));
        for (const PanelField& f : panel_fields()) {
            const auto idx = t.find_col(f.name);
            if (!idx) continue;
            if (const auto v = parse_double_opt(raw[*idx])) f.set(r, *v);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_individual_csv(const std::string& path,
                                 const std::vector<IndividualRow>& rows) {
    CsvWriter out(path);
    out.row({"analyst_id", "firm_id", "quarter", "error_individual", "time_individual",
             "nor_firm"});
    for (const auto& r : rows)
        out.row({r.analyst_id, r.firm_id, r.fiscal_quarter.str(),
                 fmt_double(r.error_individual), fmt_double(r.time_individual),
                 std::to_string(r.nor_firm)});
}

inline std::vector<IndividualRow> read_individual_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    std::vector<IndividualRow> rows;
    const auto analyst = t.col("analyst_id"), firm = t.col("firm_id"),
               quarter = t.col("quarter");
    const auto error = t.col("error_individual"), time = t.col("time_individual"),
               nor = t.col("nor_firm");
    for (const auto& raw : t.rows) {
        IndividualRow r;
        r.analyst_id = raw[analyst];
        r.firm_id = raw[firm];
        r.fiscal_quarter = Quarter::parse(raw[quarter]);
        r.error_individual = parse_double(raw[error]);
        r.time_individual = parse_double(raw[time]);
        r.nor_firm = static_cast<int>(parse_long(raw[nor]));
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace norq

#endif  // NORQ_PANEL_IO_HPP_
