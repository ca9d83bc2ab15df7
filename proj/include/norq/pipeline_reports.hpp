// pipeline_reports.hpp -- regress, bootstrap, stability, overlap, run-all.
//
// The table families mirror the study design: the main forecast-feature
// regressions, category and evaluation variants, robustness variants,
// split-sample comparisons with permutation p-values, drift and
// uncertainty-proxy outcomes, quarterly ratio and stability summaries.
// A report whose inputs are missing gets an explicit SKIPPED line.

#ifndef NORQ_PIPELINE_REPORTS_HPP_
#define NORQ_PIPELINE_REPORTS_HPP_

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "norq/pipeline.hpp"
#include "norq/stats/dataframe.hpp"
#include "norq/stats/fe_ols.hpp"
#include "norq/stats/logit.hpp"
#include "norq/stats/match_ratio.hpp"
#include "norq/stats/resample.hpp"

namespace norq {

// "dep ~ x1 + x2 + a:b | fe(firm,quarter) | cluster(firm_id) | filter(col=1) | logit"
struct ParsedSpec {
    stats::RegressionSpec spec;
    bool is_logit = false;
};

inline ParsedSpec parse_spec_string(const std::string& name, const std::string& body) {
    ParsedSpec out;
    out.spec.name = name;
    std::vector<std::string> parts;
    {
        std::stringstream ss(body);
        std::string piece;
        while (std::getline(ss, piece, '|')) parts.push_back(trim(piece));
    }
    if (parts.empty()) throw ConfigError("spec '" + name + "': empty");

    const std::string& formula = parts[0];
    const std::size_t tilde = formula.find('~');
    if (tilde == std::string::npos)
        throw ConfigError("spec '" + name + "': expected dep ~ terms");
    out.spec.dependent = trim(formula.substr(0, tilde));
    std::stringstream terms(formula.substr(tilde + 1));
    std::string term;
    while (std::getline(terms, term, '+')) {
        const std::string t = trim(term);
        if (t.empty()) continue;
        const std::size_t colon = t.find(':');
        if (colon != std::string::npos)
            out.spec.interactions.emplace_back(trim(t.substr(0, colon)),
                                               trim(t.substr(colon + 1)));
        else
            out.spec.regressors.push_back(t);
    }

    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::string& opt = parts[i];
        if (opt == "logit") {
            out.is_logit = true;
        } else if (opt.rfind("fe(", 0) == 0 && opt.back() == ')') {
            const std::string inner = opt.substr(3, opt.size() - 4);
            out.spec.fe_firm = inner.find("firm") != std::string::npos;
            out.spec.fe_quarter = inner.find("quarter") != std::string::npos;
        } else if (opt.rfind("cluster(", 0) == 0 && opt.back() == ')') {
            out.spec.cluster = trim(opt.substr(8, opt.size() - 9));
        } else if (opt.rfind("filter(", 0) == 0 && opt.back() == ')') {
            const std::string inner = opt.substr(7, opt.size() - 8);
            const std::size_t eq = inner.find('=');
            if (eq == std::string::npos)
                throw ConfigError("spec '" + name + "': filter needs col=value");
            out.spec.filter = {trim(inner.substr(0, eq)),
                               std::stod(trim(inner.substr(eq + 1)))};
        } else {
            throw ConfigError("spec '" + name + "': unknown option '" + opt + "'");
        }
    }
    return out;
}

namespace report_detail {

inline const std::vector<std::string>& baseline_controls() {
    static const std::vector<std::string> controls = {
        "sur_ear", "size", "roa", "ret_vol", "loss", "mkv",
        "lev",     "tone", "uncert", "forward", "read"};
    return controls;
}

inline stats::RegressionSpec make_spec(const std::string& name, const std::string& dep,
                                       std::vector<std::string> regressors,
                                       bool with_controls) {
    stats::RegressionSpec spec;
    spec.name = name;
    spec.dependent = dep;
    spec.regressors = std::move(regressors);
    if (with_controls)
        for (const auto& c : baseline_controls()) spec.regressors.push_back(c);
    return spec;
}

inline bool column_has_data(const stats::DataFrame& df, const std::string& name) {
    if (!df.has_numeric(name)) return false;
    for (const double v : df.num(name))
        if (std::isfinite(v)) return true;
    return false;
}

struct FamilyCollector {
    std::string output_dir;
    std::vector<stats::RegressionResult> all;

    // keeps every estimated family in results_<family>.csv
    void save(const std::string& family, const std::vector<stats::RegressionResult>& results) {
        all.insert(all.end(), results.begin(), results.end());
        if (!results.empty())
            write_results_csv(output_dir + "/results_" + family + ".csv", results);
    }
};

inline std::string run_family(const std::string& family, const std::string& title,
                              const std::vector<stats::RegressionSpec>& specs,
                              const stats::DataFrame& df, FamilyCollector& collector,
                              const std::vector<std::string>& highlight) {
    std::vector<stats::RegressionResult> results;
    std::string failures;
    for (const auto& spec : specs) {
        try {
            results.push_back(stats::fe_ols(spec, df));
        } catch (const Error& e) {
            failures += std::string("SKIPPED: ") + e.what() + "\n";
        }
    }
    collector.save(family, results);
    if (results.empty())
        return title + "\nSKIPPED: no estimable column in this family\n" + failures + "\n";
    std::vector<std::string> rows = highlight;
    for (const auto& c : baseline_controls()) rows.push_back(c);
    rows.push_back("const");
    return regression_table(title, results, rows) + failures + "\n";
}

}  // namespace report_detail

inline void cmd_regress(const RunConfig& config) {
    using namespace report_detail;
    namespace fs = std::filesystem;

    auto rows = read_panel_csv(config.output_dir + "/panel.csv");
    stats::DataFrame df = stats::panel_to_dataframe(rows);

    // alternative-model NOR columns, when the join file exists
    if (fs::exists(config.output_dir + "/panel_alt_nor.csv")) {
        const CsvTable alt = read_csv(config.output_dir + "/panel_alt_nor.csv");
        std::map<std::string, std::pair<double, double>> by_transcript;
        for (const auto& r : alt.rows)
            by_transcript[r[alt.col("transcript_id")]] = {
                parse_double(r[alt.col("nor_firm_alt")]),
                parse_double(r[alt.col("nor_f_alt")])};
        std::vector<double> nor_alt, nor_f_alt;
        for (const auto& row : rows) {
            const auto it = by_transcript.find(row.transcript_id);
            nor_alt.push_back(it == by_transcript.end() ? stats::kMissing
                                                        : it->second.first);
            nor_f_alt.push_back(it == by_transcript.end() ? stats::kMissing
                                                          : it->second.second);
        }
        df.add_numeric("nor_firm_alt", std::move(nor_alt));
        df.add_numeric("nor_f_alt", std::move(nor_f_alt));
    }

    FamilyCollector collector{config.output_dir};
    const std::vector<std::string> deps = {"error_firm", "dispersion_firm",
                                           "uncertainty_firm"};

    // main regressions
    {
        std::vector<stats::RegressionSpec> specs;
        for (const auto& dep : deps) {
            specs.push_back(make_spec("main_" + dep, dep, {"nor_firm"}, false));
            specs.push_back(make_spec("main_" + dep + "_controls", dep, {"nor_firm"}, true));
        }
        write_text(config.output_dir + "/report_table3.txt",
                   run_family("table3", "Non-responses and analyst forecasts", specs, df,
                              collector, {"nor_firm"}));
    }

    // category and evaluation variants
    {
        std::string report;
        std::vector<stats::RegressionSpec> panel_a, panel_b, panel_c;
        const std::vector<std::string> categories = {"refusal", "irrelevant", "recall",
                                                     "lack", "legal"};
        for (const auto& dep : deps) {
            panel_a.push_back(make_spec("cat_" + dep, dep, categories, false));
            panel_a.push_back(make_spec("cat_" + dep + "_controls", dep, categories, true));
            panel_b.push_back(make_spec("mscore_" + dep, dep, {"mscore"}, false));
            panel_b.push_back(make_spec("mscore_" + dep + "_controls", dep, {"mscore"}, true));
            panel_c.push_back(make_spec("scores_" + dep, dep,
                                        {"relevance", "quantity", "clarity"}, false));
            panel_c.push_back(make_spec("scores_" + dep + "_controls", dep,
                                        {"relevance", "quantity", "clarity"}, true));
        }
        report += run_family("table4a", "Panel A: classifications of non-responses",
                             panel_a, df, collector, categories);
        report += run_family("table4b", "Panel B: average evaluations", panel_b, df,
                             collector, {"mscore"});
        report += run_family("table4c", "Panel C: granular evaluations", panel_c, df,
                             collector, {"relevance", "quantity", "clarity"});
        write_text(config.output_dir + "/report_table4.txt", report);
    }

    // robustness
    {
        std::string report;
        if (column_has_data(df, "nor_firm_alt")) {
            std::vector<stats::RegressionSpec> specs;
            for (const auto& dep : deps) {
                specs.push_back(make_spec("alt_" + dep, dep, {"nor_firm_alt"}, false));
                specs.push_back(
                    make_spec("alt_" + dep + "_controls", dep, {"nor_firm_alt"}, true));
            }
            report += run_family("table5a", "Panel A: alternative-model NOR measure",
                                 specs, df, collector, {"nor_firm_alt"});
        } else {
            report += "Panel A: alternative-model NOR measure\n"
                      "SKIPPED: no second model annotations configured\n\n";
        }

        std::vector<stats::RegressionSpec> dummy_specs;
        for (const auto& dep : deps) {
            dummy_specs.push_back(make_spec("norf_" + dep, dep, {"nor_f"}, false));
            dummy_specs.push_back(make_spec("norf_" + dep + "_controls", dep, {"nor_f"}, true));
        }
        report += run_family("table5b", "Panel B: NOR dummy", dummy_specs, df, collector,
                             {"nor_f"});

        std::vector<stats::RegressionSpec> squared_specs;
        for (const std::string dep : {"squ_error_firm", "squ_uncertainty_firm"}) {
            squared_specs.push_back(make_spec("squ_" + dep, dep, {"nor_firm"}, false));
            squared_specs.push_back(
                make_spec("squ_" + dep + "_controls", dep, {"nor_firm"}, true));
        }
        report += run_family("table5c", "Panel C: squared forecast-error variants",
                             squared_specs, df, collector, {"nor_firm"});

        // individual level
        if (fs::exists(config.output_dir + "/individual_panel.csv")) {
            const auto individual =
                read_individual_csv(config.output_dir + "/individual_panel.csv");
            if (!individual.empty()) {
                stats::DataFrame idf = stats::individual_to_dataframe(individual);
                std::vector<stats::RegressionSpec> ind_specs = {
                    make_spec("ind_error", "error_individual", {"nor_firm"}, false),
                    make_spec("ind_time", "time_individual", {"nor_firm"}, false)};
                report += run_family("table5d", "Panel D: individual analysts", ind_specs,
                                     idf, collector, {"nor_firm"});
            } else {
                report += "Panel D: individual analysts\nSKIPPED: no individual rows\n\n";
            }
        }

        if (column_has_data(df, "comp") && column_has_data(df, "lwealth")) {
            std::vector<stats::RegressionSpec> incentive_specs;
            for (const auto& dep : deps) {
                auto spec = make_spec("incentive_" + dep, dep,
                                      {"nor_firm", "comp", "lwealth"}, true);
                incentive_specs.push_back(std::move(spec));
            }
            report += run_family("table5e", "Panel E: managerial incentives",
                                 incentive_specs, df, collector,
                                 {"nor_firm", "comp", "lwealth"});
        } else {
            report += "Panel E: managerial incentives\nSKIPPED: no incentive columns\n\n";
        }
        write_text(config.output_dir + "/report_table5.txt", report);
    }

    // split samples with permutation tests
    auto split_family = [&](const std::string& family, const std::string& title,
                            const std::string& partition) {
        std::string report = title + "\n" + std::string(title.size(), '=') + "\n\n";
        std::vector<stats::RegressionResult> family_results;
        for (const auto& dep : deps) {
            stats::RegressionSpec base = make_spec(partition + "_" + dep, dep, {"nor_firm"},
                                                   true);
            std::string row = dep + ": ";
            try {
                stats::RegressionSpec ones = base;
                ones.name += "_1";
                ones.filter = {{partition, 1.0}};
                stats::RegressionSpec zeros = base;
                zeros.name += "_0";
                zeros.filter = {{partition, 0.0}};
                const auto r1 = stats::fe_ols(ones, df);
                const auto r0 = stats::fe_ols(zeros, df);
                family_results.push_back(r1);
                family_results.push_back(r0);
                row += partition + "=1 coef " + fmt_fixed(r1.coef_of("nor_firm"), 4) +
                       stars(r1.find("nor_firm")->p) + " (t " +
                       fmt_fixed(r1.find("nor_firm")->t, 2) + ", n " +
                       std::to_string(r1.n_obs) + "); ";
                row += partition + "=0 coef " + fmt_fixed(r0.coef_of("nor_firm"), 4) +
                       stars(r0.find("nor_firm")->p) + " (t " +
                       fmt_fixed(r0.find("nor_firm")->t, 2) + ", n " +
                       std::to_string(r0.n_obs) + "); ";
                const auto perm = stats::fisher_permutation_diff(
                    base, df, partition, "nor_firm", config.permutation_count,
                    derive_seed(config.seed, fnv1a(partition + dep)));
                row += "diff " + fmt_fixed(perm.observed_diff, 4) + ", permutation p = " +
                       fmt_fixed(perm.p_two_sided, 3) + stars(perm.p_two_sided);
            } catch (const Error& e) {
                row += std::string("SKIPPED: ") + e.what();
            }
            report += row + "\n";
        }
        collector.save(family, family_results);
        return report + "\n";
    };

    write_text(config.output_dir + "/report_table6.txt",
               split_family("table6_mo", "Panel A: firm complexity (MO)", "mo") +
                   split_family("table6_inst", "Panel B: institutional ownership (Inst)",
                                "inst"));
    write_text(config.output_dir + "/report_table7.txt",
               split_family("table7_hrd", "Panel A: R&D intensity (H_RD)", "h_rd") +
                   split_family("table7_covid", "Panel B: COVID period", "covid"));

    // drift and uncertainty proxies
    {
        std::string report;
        if (column_has_data(df, "car_2_60") && column_has_data(df, "qr_ueps")) {
            std::vector<stats::RegressionSpec> pead;
            for (const std::string dep : {"car_2_60", "bhar_2_60"}) {
                stats::RegressionSpec plain;
                plain.name = "pead_" + dep;
                plain.dependent = dep;
                plain.regressors = {"qr_ueps"};
                pead.push_back(plain);
            }
            const std::vector<std::string> pead_controls = {"mkv", "roa",     "bm",
                                                            "loss", "num_ana", "wt_ret"};
            for (const std::string dep : {"car_2_60", "bhar_2_60"}) {
                stats::RegressionSpec full;
                full.name = "pead_" + dep + "_interacted";
                full.dependent = dep;
                full.regressors = {"qr_ueps", "nor_firm"};
                full.interactions = {{"nor_firm", "qr_ueps"}};
                for (const auto& c : pead_controls) {
                    full.regressors.push_back(c);
                    full.interactions.emplace_back(c, "qr_ueps");
                }
                pead.push_back(full);
            }
            report += run_family("table8a", "Panel A: post-announcement drift", pead, df,
                                 collector, {"qr_ueps", "nor_firm", "nor_firm:qr_ueps"});
        } else {
            report += "Panel A: post-announcement drift\nSKIPPED: drift columns missing\n\n";
        }

        if (column_has_data(df, "ret_sd")) {
            std::vector<stats::RegressionSpec> proxies;
            for (const std::string dep : {"ret_sd", "volume", "spread"}) {
                proxies.push_back(make_spec("proxy_" + dep, dep, {"nor_firm"}, false));
                proxies.push_back(
                    make_spec("proxy_" + dep + "_controls", dep, {"nor_firm"}, true));
            }
            report += run_family("table8b", "Panel B: information uncertainty proxies",
                                 proxies, df, collector, {"nor_firm"});
        } else {
            report += "Panel B: information uncertainty proxies\nSKIPPED: market outcome "
                      "columns missing\n\n";
        }
        write_text(config.output_dir + "/report_table8.txt", report);
    }

    // conversation-level motivation table (logit + OLS, per model)
    {
        std::string report;
        std::vector<stats::RegressionResult> results;
        const std::vector<std::string> motivation_regressors = {
            "word", "order", "quantity", "relevance", "clarity", "tone_q",
            "forward_q", "read_q", "uncert_q", "rd_exp", "size", "roa", "loss"};
        for (const ModelRun& model : configured_models(config)) {
            const std::string path =
                config.output_dir + "/conversation_panel_" + model.model_id + ".csv";
            if (!fs::exists(path)) {
                report += "SKIPPED: " + path + " missing\n";
                continue;
            }
            const CsvTable t = read_csv(path);
            stats::DataFrame cdf;
            std::vector<std::string> firms, quarters;
            std::map<std::string, std::vector<double>> cols;
            const std::vector<std::string> numeric_cols = {
                "nor_c", "nor_con", "word", "order", "quantity", "relevance", "clarity",
                "tone_q", "uncert_q", "forward_q", "read_q", "rd_exp", "size", "roa", "loss"};
            for (const auto& row : t.rows) {
                firms.push_back(row[t.col("firm_id")]);
                quarters.push_back(row[t.col("quarter")]);
                for (const auto& name : numeric_cols) {
                    const auto v = parse_double_opt(row[t.col(name)]);
                    cols[name].push_back(v ? *v : stats::kMissing);
                }
            }
            if (firms.empty()) {
                report += "SKIPPED: conversation panel for " + model.model_id + " is empty\n";
                continue;
            }
            cdf.add_labels("firm_id", std::move(firms));
            cdf.add_labels("quarter", std::move(quarters));
            for (auto& [name, values] : cols) cdf.add_numeric(name, std::move(values));

            stats::RegressionSpec spec;
            spec.name = "motivation_logit_" + model.model_id;
            spec.dependent = "nor_c";
            spec.regressors = motivation_regressors;
            spec.fe_firm = true;
            spec.fe_quarter = true;
            try {
                results.push_back(stats::logit(spec, cdf));
            } catch (const Error& e) {
                report += std::string("SKIPPED (logit ") + model.model_id + "): " + e.what() +
                          "\n";
            }
            stats::RegressionSpec ols = spec;
            ols.name = "motivation_ols_" + model.model_id;
            try {
                results.push_back(stats::fe_ols(ols, cdf));
            } catch (const Error& e) {
                report += std::string("SKIPPED (ols ") + model.model_id + "): " + e.what() +
                          "\n";
            }
        }
        if (!results.empty()) {
            std::vector<std::string> rows_order = motivation_regressors;
            rows_order.push_back("const");
            report = regression_table("Motivations of non-responses", results, rows_order) +
                     report;
        }
        collector.save("oa_table3", results);
        write_text(config.output_dir + "/report_oa_table3.txt", report);
    }

    // user-declared specs from the config
    for (const auto& [name, body] : config.extra_specs) {
        const ParsedSpec parsed = parse_spec_string(name, body);
        std::vector<stats::RegressionResult> results;
        try {
            results.push_back(parsed.is_logit ? stats::logit(parsed.spec, df)
                                              : stats::fe_ols(parsed.spec, df));
            collector.all.push_back(results.back());
        } catch (const Error& e) {
            write_text(config.output_dir + "/results_" + name + ".txt",
                       std::string("SKIPPED: ") + e.what() + "\n");
            continue;
        }
        write_results_csv(config.output_dir + "/results_" + name + ".csv", results);
    }

    write_results_csv(config.output_dir + "/results_all.csv", collector.all);
    write_manifest(config, "regress", {config.output_dir + "/panel.csv"},
                   {config.output_dir + "/results_all.csv"});
}

// --- bootstrap -----------------------------------------------------------------

inline void cmd_bootstrap(const RunConfig& config) {
    std::vector<std::string> outputs;
    const std::string summary_path = config.output_dir + "/bootstrap_summary.csv";
    const std::string hist_path = config.output_dir + "/bootstrap_hist.csv";
    CsvWriter summary(summary_path);
    summary.row({"model", "quarter", "level", "n_units", "point", "resample_mean",
                 "resample_sd", "iterations", "seed"});
    CsvWriter hist(hist_path);
    hist.row({"model", "quarter", "level", "bin_lo", "bin_hi", "count"});

    for (const ModelRun& model : configured_models(config)) {
        const auto calls = read_call_measures_csv(
            config.output_dir + "/call_measures_" + model.model_id + ".csv");
        const auto conversations = read_conversation_measures_csv(
            config.output_dir + "/conversation_measures_" + model.model_id + ".csv");
        const auto call_info = read_calls_jsonl(config.output_dir + "/calls.jsonl");
        std::map<std::string, int> quarter_of;
        for (const auto& c : call_info) quarter_of[c.transcript_id] = c.fiscal_quarter.index;

        std::map<int, std::vector<double>> call_units, conv_units;
        for (const auto& m : calls)
            call_units[m.fiscal_quarter.index].push_back(static_cast<double>(m.nor_f));
        for (const auto& c : conversations) {
            if (c.error) continue;
            const auto it = quarter_of.find(transcript_of(c.conver_id));
            if (it != quarter_of.end())
                conv_units[it->second].push_back(static_cast<double>(c.nor_c));
        }

        auto emit = [&](const std::map<int, std::vector<double>>& groups,
                        const std::string& level, std::uint64_t salt) {
            for (const auto& [qindex, units] : groups) {
                if (units.empty()) continue;
                Quarter quarter;
                quarter.index = qindex;
                const std::uint64_t seed =
                    derive_seed(config.seed, salt ^ static_cast<std::uint64_t>(qindex));
                const auto result = stats::bootstrap_ratio(
                    units, stats::mean_statistic, config.bootstrap_iterations, seed,
                    level + "_ratio");
                summary.row({model.model_id, quarter.str(), level,
                             std::to_string(units.size()), fmt_double(result.point_estimate),
                             fmt_double(result.resample_mean),
                             fmt_double(result.resample_sd),
                             std::to_string(result.iterations), std::to_string(seed)});

                // 100-bin histogram over the observed sample range
                const auto [lo_it, hi_it] =
                    std::minmax_element(result.samples.begin(), result.samples.end());
                const double lo = *lo_it, hi = *hi_it;
                const int bins = 100;
                std::vector<std::size_t> counts(bins, 0);
                const double width = hi > lo ? (hi - lo) / bins : 1.0;
                for (const double s : result.samples) {
                    int b = static_cast<int>((s - lo) / width);
                    if (b >= bins) b = bins - 1;
                    if (b < 0) b = 0;
                    ++counts[static_cast<std::size_t>(b)];
                }
                for (int b = 0; b < bins; ++b) {
                    if (counts[static_cast<std::size_t>(b)] == 0) continue;
                    hist.row({model.model_id, quarter.str(), level,
                              fmt_double(lo + b * width), fmt_double(lo + (b + 1) * width),
                              std::to_string(counts[static_cast<std::size_t>(b)])});
                }
            }
        };
        emit(call_units, "call", 0x1111);
        emit(conv_units, "conversation", 0x2222);
    }
    write_manifest(config, "bootstrap", {config.output_dir + "/calls.jsonl"},
                   {summary_path, hist_path});
}

// --- stability -------------------------------------------------------------------

inline void cmd_stability(const RunConfig& config) {
    namespace fs = std::filesystem;
    const std::string primary = config.model_id;
    const auto exchanges = read_corpus_jsonl(config.output_dir + "/corpus.jsonl");
    const auto baseline_annotations =
        read_annotations(config.output_dir + "/annotations_" + primary + ".jsonl");

    // balanced-ish sample: up to half with NORs, filled with clean ones
    std::vector<const NorAnnotation*> with_nor, without_nor;
    for (const auto& ann : baseline_annotations) {
        if (ann.is_error()) continue;
        (ann.nor_count >= 1 ? with_nor : without_nor).push_back(&ann);
    }
    Rng rng(derive_seed(config.seed, 0xabcdef));
    rng.shuffle(with_nor);
    rng.shuffle(without_nor);
    const std::size_t want = static_cast<std::size_t>(config.stability_sample);
    const std::size_t take_nor = std::min(with_nor.size(), want / 2);
    const std::size_t take_clean = std::min(without_nor.size(), want - take_nor);

    std::map<std::string, int> baseline;
    std::set<std::string> selected;
    for (std::size_t i = 0; i < take_nor; ++i) {
        baseline[with_nor[i]->conver_id] = 1;
        selected.insert(with_nor[i]->conver_id);
    }
    for (std::size_t i = 0; i < take_clean; ++i) {
        baseline[without_nor[i]->conver_id] = 0;
        selected.insert(without_nor[i]->conver_id);
    }
    if (baseline.empty()) throw EmptyInput("stability: no valid baseline conversations");

    std::vector<QAExchange> sample;
    for (const auto& x : exchanges)
        if (selected.count(x.conver_id)) sample.push_back(x);

    auto backend = make_backend(config, config.backend_kind, primary,
                                config.scripted_fixture);
    fs::create_directories(config.cache_dir + "/stability");
    std::vector<std::map<std::string, int>> repetitions;
    for (int rep = 0; rep < config.stability_reps; ++rep) {
        AnnotationCache cache(config.cache_dir + "/stability/" + primary + "_rep" +
                              std::to_string(rep) + ".jsonl");
        const auto annotations =
            annotate_corpus(sample, *backend, cache, prompt_params(config), config.jobs);
        std::map<std::string, int> outcome;
        for (const auto& ann : annotations)
            outcome[ann.conver_id] = (!ann.is_error() && ann.nor_count >= 1) ? 1 : 0;
        repetitions.push_back(std::move(outcome));
    }

    const auto result = stats::match_ratio(baseline, repetitions);
    {
        CsvWriter out(config.output_dir + "/stability.csv");
        out.row({"conver_id", "baseline_nor", "match_percent"});
        for (const auto& [id, percent] : result.per_unit)
            out.row({id, std::to_string(baseline.at(id)), fmt_double(percent)});
    }
    std::ostringstream report;
    report << "Match ratios over " << config.stability_reps << " repetitions ("
           << primary << ")\n";
    report << "baseline_NOR  N     Mean    SD      Min     Max\n";
    for (const auto* g : {&result.group0, &result.group1, &result.total})
        report << g->label << (g->label.size() < 5 ? "             " : "         ")
               << g->n << "    " << fmt_fixed(g->mean, 2) << "   " << fmt_fixed(g->sd, 2)
               << "   " << fmt_fixed(g->min, 2) << "   " << fmt_fixed(g->max, 2) << "\n";
    write_text(config.output_dir + "/report_oa_table2.txt", report.str());
    write_manifest(config, "stability",
                   {config.output_dir + "/annotations_" + primary + ".jsonl"},
                   {config.output_dir + "/stability.csv"});
}

// --- overlap ---------------------------------------------------------------------

inline void cmd_overlap(const RunConfig& config) {
    const auto models = configured_models(config);
    const std::string overlap_path = config.output_dir + "/overlap.csv";
    if (models.size() < 2) {
        write_text(config.output_dir + "/report_overlap.txt",
                   "SKIPPED: no second model configured\n");
        return;
    }
    const auto a = read_conversation_measures_csv(
        config.output_dir + "/conversation_measures_" + models[0].model_id + ".csv");
    const auto b = read_conversation_measures_csv(
        config.output_dir + "/conversation_measures_" + models[1].model_id + ".csv");
    const OverlapResult overlap = model_overlap(a, b);
    CsvWriter out(overlap_path);
    out.row({"model_a", "model_b", "common", "only_a", "only_b", "jaccard"});
    out.row({models[0].model_id, models[1].model_id, std::to_string(overlap.common),
             std::to_string(overlap.only_a), std::to_string(overlap.only_b),
             fmt_double(overlap.jaccard)});
    std::ostringstream report;
    report << "NOR overlap between " << models[0].model_id << " and " << models[1].model_id
           << "\n";
    report << "common " << overlap.common << ", only " << models[0].model_id << " "
           << overlap.only_a << ", only " << models[1].model_id << " " << overlap.only_b
           << ", jaccard " << fmt_fixed(overlap.jaccard, 4) << "\n";
    write_text(config.output_dir + "/report_overlap.txt", report.str());
    write_manifest(config, "overlap", {}, {overlap_path});
}

// --- run-all ---------------------------------------------------------------------

inline void cmd_run_all(const RunConfig& config) {
    std::cout << "[1/8] ingest\n";
    cmd_ingest(config);
    std::cout << "[2/8] annotate\n";
    cmd_annotate(config);
    std::cout << "[3/8] measure\n";
    cmd_measure(config);
    std::cout << "[4/8] panel\n";
    cmd_panel(config);
    std::cout << "[5/8] regress\n";
    cmd_regress(config);
    std::cout << "[6/8] bootstrap\n";
    cmd_bootstrap(config);
    std::cout << "[7/8] stability\n";
    cmd_stability(config);
    std::cout << "[8/8] overlap\n";
    cmd_overlap(config);
}

}  // namespace norq

#endif  // NORQ_PIPELINE_REPORTS_HPP_
