// pipeline.hpp -- stage orchestration: ingest, annotate, measure, panel.
//
// Every stage reads the previous stage's artifacts from the output
// directory and writes its own, plus a manifest (config hash, input
// hashes, seed, versions) so equal manifests imply equal outputs.

#ifndef NORQ_PIPELINE_HPP_
#define NORQ_PIPELINE_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "norq/backend.hpp"
#include "norq/backend_http.hpp"
#include "norq/config.hpp"
#include "norq/corpus.hpp"
#include "norq/csv.hpp"
#include "norq/elicitor.hpp"
#include "norq/lexicon.hpp"
#include "norq/measures.hpp"
#include "norq/panel.hpp"
#include "norq/panel_io.hpp"
#include "norq/prompt.hpp"
#include "norq/report.hpp"
#include "norq/stats/ttest.hpp"

namespace norq {

inline constexpr const char* kVersion = "0.1.0";

// --- manifests ---------------------------------------------------------------

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return hash_hex(fnv1a(buffer.str()));
}

inline void write_manifest(const RunConfig& config, const std::string& stage,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["stage"] = stage;
    j["version"] = kVersion;
    j["prompt_template"] = kPromptTemplateVersion;
    j["seed"] = config.seed;
    j["config_hash"] = hash_hex(fnv1a(config_to_string(config)));
    nlohmann::json in = nlohmann::json::object(), out = nlohmann::json::object();
    for (const auto& path : inputs) in[path] = hash_file(path);
    for (const auto& path : outputs) out[path] = hash_file(path);
    j["inputs"] = in;
    j["outputs"] = out;
    std::ofstream file(config.output_dir + "/manifest_" + stage + ".json",
                       std::ios::binary);
    file << j.dump(2) << "\n";
}

// --- shared artifact I/O -------------------------------------------------------

struct CallInfo {
    std::string transcript_id;
    std::string firm_id;
    Quarter fiscal_quarter;
    int version = 1;
    std::string presentation;
};

inline void write_calls_jsonl(const std::string& path, const std::vector<Transcript>& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    for (const auto& t : corpus) {
        out << nlohmann::json{{"transcript_id", t.transcript_id},
                              {"firm_id", t.firm_id},
                              {"quarter", t.fiscal_quarter.str()},
                              {"version", t.version},
                              {"presentation", t.presentation}}
                   .dump()
            << "\n";
    }
}

inline std::vector<CallInfo> read_calls_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputFile("cannot open " + path + " (run ingest first)");
    std::vector<CallInfo> calls;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto j = nlohmann::json::parse(line);
        CallInfo c;
        c.transcript_id = j.at("transcript_id").get<std::string>();
        c.firm_id = j.at("firm_id").get<std::string>();
        c.fiscal_quarter = Quarter::parse(j.at("quarter").get<std::string>());
        c.version = j.at("version").get<int>();
        c.presentation = j.at("presentation").get<std::string>();
        calls.push_back(std::move(c));
    }
    return calls;
}

inline void write_corpus_jsonl(const std::string& path, const std::vector<Transcript>& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << corpus_to_jsonl(corpus);
}

inline std::vector<QAExchange> read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputFile("cannot open " + path + " (run ingest first)");
    std::vector<QAExchange> exchanges;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        exchanges.push_back(exchange_from_json(nlohmann::json::parse(line)));
    }
    return exchanges;
}

inline PromptParams prompt_params(const RunConfig& config) {
    PromptParams params;
    params.temperature = config.temperature;
    params.frequency_penalty = config.frequency_penalty;
    params.presence_penalty = config.presence_penalty;
    params.max_tokens = config.max_tokens;
    return params;
}

inline std::unique_ptr<ModelBackend> make_backend(const RunConfig& config,
                                                  const std::string& kind,
                                                  const std::string& model_id,
                                                  const std::string& scripted_fixture) {
    if (kind == "heuristic") return std::make_unique<HeuristicBackend>(model_id);
    if (kind == "scripted") {
        if (scripted_fixture.empty())
            throw ConfigError("scripted backend needs a fixture path");
        return std::make_unique<ScriptedBackend>(
            ScriptedBackend::from_file(model_id, scripted_fixture));
    }
    if (kind == "http") {
        HttpBackendConfig http;
        http.host = config.endpoint_host;
        http.path = config.endpoint_path;
        http.model_id = model_id;
        http.api_key_env = config.api_key_env;
        http.max_retries = config.max_retries;
        http.timeout_seconds = config.timeout_seconds;
        if (http.host.empty()) throw ConfigError("http backend needs backend.endpoint_host");
        return std::make_unique<HttpBackend>(http);
    }
    throw ConfigError("unknown backend kind '" + kind + "'");
}

// --- ingest --------------------------------------------------------------------

struct IngestSummary {
    std::size_t files_seen = 0;
    std::size_t parse_failures = 0;
    std::size_t multi_firm_dropped = 0;
    std::size_t superseded_dropped = 0;
    std::size_t transcripts = 0;
    std::size_t exchanges = 0;
};

inline IngestSummary cmd_ingest(const RunConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);

    std::vector<std::string> files;
    if (fs::exists(config.corpus_dir))
        for (const auto& entry : fs::directory_iterator(config.corpus_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw BadInputFile("no transcript files in " + config.corpus_dir);

    IngestSummary summary;
    summary.files_seen = files.size();
    std::vector<Transcript> parsed;
    std::vector<std::string> failures;
    for (const auto& path : files) {
        try {
            parsed.push_back(parse_transcript_file(path));
        } catch (const MalformedDocument& e) {
            ++summary.parse_failures;
            failures.push_back(e.what());
        }
    }
    if (parsed.empty()) throw BadInputFile("no parseable transcripts in " + config.corpus_dir);

    DedupeLog dedupe_log;
    std::vector<Transcript> corpus = dedupe_corpus(std::move(parsed), &dedupe_log);
    summary.multi_firm_dropped = dedupe_log.multi_firm_dropped;
    summary.superseded_dropped = dedupe_log.superseded_dropped;
    summary.transcripts = corpus.size();
    for (const auto& t : corpus) summary.exchanges += t.exchanges.size();

    write_corpus_jsonl(config.output_dir + "/corpus.jsonl", corpus);
    write_calls_jsonl(config.output_dir + "/calls.jsonl", corpus);

    std::ostringstream ledger;
    ledger << "Selection\tDropped\tRemaining\n";
    ledger << "Transcript files\t\t" << summary.files_seen << "\n";
    ledger << "less unparseable files\t(" << summary.parse_failures << ")\t"
           << summary.files_seen - summary.parse_failures << "\n";
    ledger << "less transcripts under multiple firm ids\t(" << summary.multi_firm_dropped
           << ")\t" << summary.files_seen - summary.parse_failures - summary.multi_firm_dropped
           << "\n";
    ledger << "less superseded versions\t(" << summary.superseded_dropped << ")\t"
           << summary.transcripts << "\n";
    ledger << "Canonical transcripts\t\t" << summary.transcripts << "\n";
    ledger << "Q&A exchanges\t\t" << summary.exchanges << "\n";
    for (const auto& f : failures) ledger << "# skipped: " << f << "\n";
    write_text(config.output_dir + "/ingest_ledger.txt", ledger.str());

    write_manifest(config, "ingest", files,
                   {config.output_dir + "/corpus.jsonl", config.output_dir + "/calls.jsonl"});
    return summary;
}

// --- annotate --------------------------------------------------------------------

struct ModelRun {
    std::string kind;
    std::string model_id;
    std::string scripted_fixture;
};

inline std::vector<ModelRun> configured_models(const RunConfig& config) {
    std::vector<ModelRun> models;
    models.push_back({config.backend_kind, config.model_id, config.scripted_fixture});
    if (!config.second_kind.empty())
        models.push_back({config.second_kind,
                          config.second_model_id.empty() ? "second" : config.second_model_id,
                          config.second_scripted_fixture});
    return models;
}

inline std::map<std::string, AnnotateStats> cmd_annotate(const RunConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(config.cache_dir);
    const auto exchanges = read_corpus_jsonl(config.output_dir + "/corpus.jsonl");

    std::map<std::string, AnnotateStats> all_stats;
    std::vector<std::string> outputs;
    for (const ModelRun& model : configured_models(config)) {
        auto backend = make_backend(config, model.kind, model.model_id,
                                    model.scripted_fixture);
        AnnotationCache cache(config.cache_dir + "/" + model.model_id + ".jsonl");
        AnnotateStats stats;
        const auto annotations = annotate_corpus(exchanges, *backend, cache,
                                                 prompt_params(config), config.jobs, &stats);
        const std::string path =
            config.output_dir + "/annotations_" + model.model_id + ".jsonl";
        write_annotations(path, annotations);
        outputs.push_back(path);
        all_stats[model.model_id] = stats;
        std::cout << "annotate[" << model.model_id << "]: " << stats.total << " exchanges, "
                  << stats.cached << " cached, " << stats.requested << " requested, "
                  << stats.errors << " ERROR, " << stats.retries << " retries\n";
    }
    write_manifest(config, "annotate", {config.output_dir + "/corpus.jsonl"}, outputs);
    return all_stats;
}

// --- measure ---------------------------------------------------------------------

struct MeasureArtifacts {
    std::vector<CallMeasures> calls;
    std::vector<ConversationMeasure> conversations;
    std::size_t calls_all_errored = 0;
};

inline MeasureArtifacts build_measures(const std::vector<CallInfo>& calls,
                                       const std::vector<NorAnnotation>& annotations) {
    std::map<std::string, const CallInfo*> call_index;
    for (const auto& c : calls) call_index[c.transcript_id] = &c;

    std::map<std::string, std::vector<NorAnnotation>> by_transcript;
    for (const auto& ann : annotations)
        by_transcript[transcript_of(ann.conver_id)].push_back(ann);

    MeasureArtifacts out;
    for (const auto& [transcript_id, anns] : by_transcript) {
        const auto info = call_index.find(transcript_id);
        if (info == call_index.end()) continue;
        for (const auto& ann : anns)
            out.conversations.push_back(conversation_measure(ann));
        try {
            CallMeasures m = summarize_call(transcript_id, anns);
            m.firm_id = info->second->firm_id;
            m.fiscal_quarter = info->second->fiscal_quarter;
            out.calls.push_back(std::move(m));
        } catch (const AllErrored&) {
            ++out.calls_all_errored;
        }
    }
    return out;
}

inline void write_call_measures_csv(const std::string& path,
                                    const std::vector<CallMeasures>& calls) {
    CsvWriter out(path);
    out.row({"transcript_id", "firm_id", "quarter", "nor_f", "nor_firm", "refusal", "lack",
             "legal", "recall", "irrelevant", "other_cat", "mean_quantity", "mean_relevance",
             "mean_clarity", "mscore", "n_exchanges", "n_errors"});
    for (const auto& m : calls) {
        auto count = [&](NorCategory c) {
            const auto it = m.category_counts.find(c);
            return std::to_string(it == m.category_counts.end() ? 0 : it->second);
        };
        out.row({m.transcript_id, m.firm_id, m.fiscal_quarter.str(), std::to_string(m.nor_f),
                 std::to_string(m.nor_firm), count(NorCategory::Refusal),
                 count(NorCategory::LackOfInfo), count(NorCategory::LegalAffairs),
                 count(NorCategory::Recall), count(NorCategory::Irrelevant),
                 count(NorCategory::Other), fmt_double(m.mean_quantity),
                 fmt_double(m.mean_relevance), fmt_double(m.mean_clarity),
                 fmt_double(m.mscore), std::to_string(m.n_exchanges),
                 std::to_string(m.n_errors)});
    }
}

inline std::vector<CallMeasures> read_call_measures_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    std::vector<CallMeasures> out;
    for (const auto& row : t.rows) {
        CallMeasures m;
        m.transcript_id = row[t.col("transcript_id")];
        m.firm_id = row[t.col("firm_id")];
        m.fiscal_quarter = Quarter::parse(row[t.col("quarter")]);
        m.nor_f = static_cast<int>(parse_long(row[t.col("nor_f")]));
        m.nor_firm = static_cast<int>(parse_long(row[t.col("nor_firm")]));
        m.category_counts[NorCategory::Refusal] =
            static_cast<int>(parse_long(row[t.col("refusal")]));
        m.category_counts[NorCategory::LackOfInfo] =
            static_cast<int>(parse_long(row[t.col("lack")]));
        m.category_counts[NorCategory::LegalAffairs] =
            static_cast<int>(parse_long(row[t.col("legal")]));
        m.category_counts[NorCategory::Recall] =
            static_cast<int>(parse_long(row[t.col("recall")]));
        m.category_counts[NorCategory::Irrelevant] =
            static_cast<int>(parse_long(row[t.col("irrelevant")]));
        m.category_counts[NorCategory::Other] =
            static_cast<int>(parse_long(row[t.col("other_cat")]));
        m.mean_quantity = parse_double(row[t.col("mean_quantity")]);
        m.mean_relevance = parse_double(row[t.col("mean_relevance")]);
        m.mean_clarity = parse_double(row[t.col("mean_clarity")]);
        m.mscore = parse_double(row[t.col("mscore")]);
        m.n_exchanges = static_cast<std::size_t>(parse_long(row[t.col("n_exchanges")]));
        m.n_errors = static_cast<std::size_t>(parse_long(row[t.col("n_errors")]));
        out.push_back(std::move(m));
    }
    return out;
}

inline void write_conversation_measures_csv(const std::string& path,
                                            const std::vector<ConversationMeasure>& convs) {
    CsvWriter out(path);
    out.row({"conver_id", "error", "nor_c", "nor_con", "categories", "quantity", "relevance",
             "clarity"});
    for (const auto& c : convs) {
        std::string cats;
        for (const auto cat : c.categories) {
            if (!cats.empty()) cats += ";";
            cats += category_name(cat);
        }
        out.row({c.conver_id, c.error ? "1" : "0", std::to_string(c.nor_c),
                 std::to_string(c.nor_con), cats, std::to_string(c.quantity),
                 std::to_string(c.relevance), std::to_string(c.clarity)});
    }
}

inline std::vector<ConversationMeasure> read_conversation_measures_csv(
    const std::string& path) {
    const CsvTable t = read_csv(path);
    std::vector<ConversationMeasure> out;
    for (const auto& row : t.rows) {
        ConversationMeasure c;
        c.conver_id = row[t.col("conver_id")];
        c.error = row[t.col("error")] == "1";
        c.nor_c = static_cast<int>(parse_long(row[t.col("nor_c")]));
        c.nor_con = static_cast<int>(parse_long(row[t.col("nor_con")]));
        std::stringstream cats(row[t.col("categories")]);
        std::string label;
        while (std::getline(cats, label, ';'))
            if (const auto cat = parse_category(label)) c.categories.push_back(*cat);
        c.quantity = static_cast<int>(parse_long(row[t.col("quantity")]));
        c.relevance = static_cast<int>(parse_long(row[t.col("relevance")]));
        c.clarity = static_cast<int>(parse_long(row[t.col("clarity")]));
        out.push_back(std::move(c));
    }
    return out;
}

inline std::string nor_distribution_report(const std::string& model_id,
                                           const MeasureArtifacts& art) {
    std::map<int, std::size_t> by_count;
    std::size_t errors = 0;
    std::map<NorCategory, std::size_t> categories;
    for (const auto& c : art.conversations) {
        if (c.error) { ++errors; continue; }
        ++by_count[std::min(c.nor_con, 3)];
        for (const auto cat : c.categories) ++categories[cat];
    }
    std::ostringstream out;
    out << "Model " << model_id << "\n";
    out << "  conversations by NOR count: ";
    for (int k = 0; k <= 3; ++k) out << k << "=" << by_count[k] << " ";
    out << "ERROR=" << errors << " all=" << art.conversations.size() << "\n";
    out << "  NOR categories: ";
    for (const NorCategory c : kAllCategories)
        out << category_name(c) << "=" << categories[c] << " ";
    out << "\n";

    // score descriptives over valid conversations
    auto describe = [&](const char* label, auto getter) {
        std::vector<double> values;
        for (const auto& c : art.conversations)
            if (!c.error) values.push_back(static_cast<double>(getter(c)));
        if (values.empty()) return;
        std::sort(values.begin(), values.end());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double sd = values.size() > 1
                              ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                              : 0.0;
        out << "  " << label << ": mean=" << fmt_fixed(mean, 2) << " sd=" << fmt_fixed(sd, 2)
            << " min=" << fmt_fixed(values.front(), 2)
            << " median=" << fmt_fixed(values[values.size() / 2], 2)
            << " max=" << fmt_fixed(values.back(), 2) << " n=" << values.size()
            << " error=" << errors << "\n";
    };
    describe("Quantity", [](const ConversationMeasure& c) { return c.quantity; });
    describe("Relevance", [](const ConversationMeasure& c) { return c.relevance; });
    describe("Clarity", [](const ConversationMeasure& c) { return c.clarity; });
    out << "  calls dropped with every exchange errored: " << art.calls_all_errored << "\n";
    return out.str();
}

inline void cmd_measure(const RunConfig& config) {
    const auto calls = read_calls_jsonl(config.output_dir + "/calls.jsonl");

    std::string table1;
    std::string oa_table1;
    std::vector<std::string> outputs;
    for (const ModelRun& model : configured_models(config)) {
        const std::string ann_path =
            config.output_dir + "/annotations_" + model.model_id + ".jsonl";
        const auto annotations = read_annotations(ann_path);
        const MeasureArtifacts art = build_measures(calls, annotations);

        const std::string call_path =
            config.output_dir + "/call_measures_" + model.model_id + ".csv";
        const std::string conv_path =
            config.output_dir + "/conversation_measures_" + model.model_id + ".csv";
        write_call_measures_csv(call_path, art.calls);
        write_conversation_measures_csv(conv_path, art.conversations);
        outputs.push_back(call_path);
        outputs.push_back(conv_path);

        // quarterly ratios
        std::map<int, std::vector<CallMeasures>> calls_by_quarter;
        for (const auto& m : art.calls) calls_by_quarter[m.fiscal_quarter.index].push_back(m);
        std::map<int, std::vector<ConversationMeasure>> convs_by_quarter;
        std::map<std::string, int> call_quarter;
        for (const auto& c : calls) call_quarter[c.transcript_id] = c.fiscal_quarter.index;
        for (const auto& conv : art.conversations) {
            const auto it = call_quarter.find(transcript_of(conv.conver_id));
            if (it != call_quarter.end()) convs_by_quarter[it->second].push_back(conv);
        }

        const std::string ratio_path =
            config.output_dir + "/quarter_ratios_" + model.model_id + ".csv";
        CsvWriter ratios(ratio_path);
        ratios.row({"quarter", "n_calls", "nor_f_ratio", "n_conversations", "nor_c_ratio",
                    "refusal", "recall", "lack", "irrelevant", "legal", "other_cat",
                    "n_errors", "nor_con_sum"});
        oa_table1 += "Model " + model.model_id + "\n";
        oa_table1 += "quarter  NOR_F%  NOR_C%  Refusal%  Recall%  Lack%  Irrelevant%  "
                     "Legal%  Others%\n";
        for (const auto& [qindex, quarter_calls] : calls_by_quarter) {
            Quarter quarter;
            quarter.index = qindex;
            const QuarterRatios qr =
                quarter_ratios(quarter_calls, convs_by_quarter[qindex], quarter);
            ratios.row({quarter.str(), std::to_string(qr.n_calls),
                        fmt_double(qr.nor_f_ratio), std::to_string(qr.n_conversations),
                        fmt_double(qr.nor_c_ratio),
                        fmt_double(qr.category_ratios.at(NorCategory::Refusal)),
                        fmt_double(qr.category_ratios.at(NorCategory::Recall)),
                        fmt_double(qr.category_ratios.at(NorCategory::LackOfInfo)),
                        fmt_double(qr.category_ratios.at(NorCategory::Irrelevant)),
                        fmt_double(qr.category_ratios.at(NorCategory::LegalAffairs)),
                        fmt_double(qr.category_ratios.at(NorCategory::Other)),
                        std::to_string(qr.n_conversation_errors),
                        std::to_string(qr.nor_con_sum)});
            oa_table1 += quarter.str() + "  " + fmt_fixed(100 * qr.nor_f_ratio, 2) + "%  " +
                         fmt_fixed(100 * qr.nor_c_ratio, 2) + "%  " +
                         fmt_fixed(100 * qr.category_ratios.at(NorCategory::Refusal), 2) +
                         "%  " +
                         fmt_fixed(100 * qr.category_ratios.at(NorCategory::Recall), 2) +
                         "%  " +
                         fmt_fixed(100 * qr.category_ratios.at(NorCategory::LackOfInfo), 2) +
                         "%  " +
                         fmt_fixed(100 * qr.category_ratios.at(NorCategory::Irrelevant), 2) +
                         "%  " +
                         fmt_fixed(100 * qr.category_ratios.at(NorCategory::LegalAffairs), 2) +
                         "%  " +
                         fmt_fixed(100 * qr.category_ratios.at(NorCategory::Other), 2) + "%\n";
        }
        oa_table1 += "\n";
        outputs.push_back(ratio_path);
        table1 += nor_distribution_report(model.model_id, art) + "\n";
    }

    write_text(config.output_dir + "/report_table1.txt", table1);
    write_text(config.output_dir + "/report_oa_table1.txt", oa_table1);

    // canonical names alias the primary model's files
    namespace fs = std::filesystem;
    const auto copy_alias = [&](const std::string& from, const std::string& to) {
        fs::copy_file(config.output_dir + "/" + from, config.output_dir + "/" + to,
                      fs::copy_options::overwrite_existing);
        outputs.push_back(config.output_dir + "/" + to);
    };
    copy_alias("call_measures_" + config.model_id + ".csv", "call_measures.csv");
    copy_alias("conversation_measures_" + config.model_id + ".csv",
               "conversation_measures.csv");
    copy_alias("quarter_ratios_" + config.model_id + ".csv", "quarter_ratios.csv");

    write_manifest(config, "measure", {config.output_dir + "/calls.jsonl"}, outputs);
}

// --- panel ------------------------------------------------------------------------

inline void cmd_panel(const RunConfig& config) {
    const auto calls = read_calls_jsonl(config.output_dir + "/calls.jsonl");
    const WordLists lists = load_word_lists(config.lexicon_dir);

    const std::string primary = config.model_id;
    const auto call_measures = read_call_measures_csv(
        config.output_dir + "/call_measures_" + primary + ".csv");

    std::map<std::string, const CallInfo*> call_index;
    for (const auto& c : calls) call_index[c.transcript_id] = &c;

    std::vector<CallRecord> records;
    for (const auto& m : call_measures) {
        const auto info = call_index.find(m.transcript_id);
        if (info == call_index.end()) continue;
        CallRecord record;
        record.measures = m;
        record.presentation =
            text_metrics(info->second->presentation, lists, config.fog_threshold());
        records.push_back(std::move(record));
    }

    const std::string data = config.data_dir;
    const auto summary = load_forecast_summary(data + "/forecasts_summary.csv");
    const auto detail = load_forecast_detail(data + "/forecasts_detail.csv");
    const auto fundamentals = load_fundamentals(data + "/fundamentals.csv");
    const auto market = load_daily_market(data + "/daily_market.csv");
    std::map<FirmQuarter, IncentiveStats> incentives;
    if (std::filesystem::exists(data + "/incentives.csv"))
        incentives = load_incentives(data + "/incentives.csv");

    PanelOptions options;
    options.h_rd_by_rd_expense = config.h_rd_by_rd_expense;
    PanelBuild build =
        assemble_panel(records, summary, detail, fundamentals, market, incentives, options);

    // second model's NOR measures, joined by transcript for Table 5 Panel A
    const auto models = configured_models(config);
    if (models.size() > 1) {
        const auto alt = read_call_measures_csv(
            config.output_dir + "/call_measures_" + models[1].model_id + ".csv");
        std::map<std::string, const CallMeasures*> alt_index;
        for (const auto& m : alt) alt_index[m.transcript_id] = &m;
        CsvWriter alt_csv(config.output_dir + "/panel_alt_nor.csv");
        alt_csv.row({"transcript_id", "nor_firm_alt", "nor_f_alt"});
        for (const auto& row : build.rows) {
            const auto it = alt_index.find(row.transcript_id);
            if (it != alt_index.end())
                alt_csv.row({row.transcript_id, std::to_string(it->second->nor_firm),
                             std::to_string(it->second->nor_f)});
        }
    }

    if (!config.volume_log)
        for (auto& row : build.rows) row.volume = row.volume_raw;

    winsorize_panel(build.rows, config.winsor_lower, config.winsor_upper,
                    config.winsor_per_quarter);
    winsorize_individual(build.individual_rows, config.winsor_lower, config.winsor_upper);

    write_panel_csv(config.output_dir + "/panel.csv", build.rows);
    write_individual_csv(config.output_dir + "/individual_panel.csv", build.individual_rows);
    write_text(config.output_dir + "/selection_ledger.txt", build.ledger.to_text());

    // conversation-level dataset for the motivation table, one per model
    {
        const auto exchanges = read_corpus_jsonl(config.output_dir + "/corpus.jsonl");
        std::map<std::string, const QAExchange*> exchange_index;
        for (const auto& x : exchanges) exchange_index[x.conver_id] = &x;
        std::map<std::string, const PanelRow*> row_index;
        for (const auto& row : build.rows) row_index[row.transcript_id] = &row;
        const ExchangeScope scope = config.exchange_metrics_all_turns
                                        ? ExchangeScope::AllTurns
                                        : ExchangeScope::AnalystTurns;

        for (const ModelRun& model : configured_models(config)) {
            const std::string conv_path =
                config.output_dir + "/conversation_measures_" + model.model_id + ".csv";
            if (!std::filesystem::exists(conv_path)) continue;
            const auto conversations = read_conversation_measures_csv(conv_path);

            CsvWriter conv_csv(config.output_dir + "/conversation_panel_" + model.model_id +
                               ".csv");
            conv_csv.row({"conver_id", "firm_id", "quarter", "nor_c", "nor_con", "word",
                          "order", "quantity", "relevance", "clarity", "tone_q", "uncert_q",
                          "forward_q", "read_q", "rd_exp", "size", "roa", "loss"});
            for (const auto& conv : conversations) {
                if (conv.error) continue;
                const auto row_it = row_index.find(transcript_of(conv.conver_id));
                if (row_it == row_index.end()) continue;  // call not in the final sample
                const auto x_it = exchange_index.find(conv.conver_id);
                if (x_it == exchange_index.end()) continue;
                const PanelRow& row = *row_it->second;
                const QAExchange& exchange = *x_it->second;
                TextMetrics metrics;
                try {
                    metrics = exchange_metrics(exchange, lists, scope, config.fog_threshold());
                } catch (const EmptyText&) {
                    // exchange with no measurable analyst text keeps zero metrics
                }
                conv_csv.row({conv.conver_id, row.firm_id, row.quarter.str(),
                              std::to_string(conv.nor_c), std::to_string(conv.nor_con),
                              std::to_string(exchange_word_count(exchange)),
                              std::to_string(exchange.order), std::to_string(conv.quantity),
                              std::to_string(conv.relevance), std::to_string(conv.clarity),
                              fmt_double(metrics.tone), fmt_double(metrics.uncert),
                              fmt_double(metrics.forward), fmt_double(metrics.fog),
                              fmt_double(row.rd_exp), fmt_double(row.size),
                              fmt_double(row.roa), std::to_string(row.loss)});
            }
        }
    }

    // summary statistics + univariate table
    {
        std::ostringstream table2;
        table2 << "Panel A-D: summary statistics (winsorized estimation sample)\n";
        table2 << "variable            N      mean       sd        min       p50       max\n";
        for (const PanelField& field : panel_fields()) {
            std::vector<double> values;
            for (const auto& row : build.rows)
                if (const auto v = field.get(row)) values.push_back(*v);
            if (values.empty()) continue;
            std::sort(values.begin(), values.end());
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            const double sd = values.size() > 1
                                  ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                                  : 0.0;
            auto pad = [](std::string s, std::size_t w) {
                if (s.size() < w) s += std::string(w - s.size(), ' ');
                return s;
            };
            table2 << pad(field.name, 20) << pad(std::to_string(values.size()), 7)
                   << pad(fmt_fixed(mean, 3), 10) << pad(fmt_fixed(sd, 3), 10)
                   << pad(fmt_fixed(values.front(), 3), 10)
                   << pad(fmt_fixed(values[values.size() / 2], 3), 10)
                   << pad(fmt_fixed(values.back(), 3), 10) << "\n";
        }

        table2 << "\nPanel E: univariate analysis by NOR_F\n";
        table2 << "variable            mean(NOR_F=0)  mean(NOR_F=1)  diff        t\n";
        const std::vector<std::string> univariate_vars = {
            "error_firm", "dispersion_firm", "uncertainty_firm", "sur_ear", "size", "roa",
            "ret_vol", "loss", "mkv", "lev", "tone", "uncert", "forward", "read"};
        for (const std::string& name : univariate_vars) {
            const PanelField* field = nullptr;
            for (const auto& f : panel_fields())
                if (f.name == name) field = &f;
            if (!field) continue;
            std::vector<double> group0, group1;
            for (const auto& row : build.rows) {
                const auto v = field->get(row);
                if (!v) continue;
                (row.nor_f == 0 ? group0 : group1).push_back(*v);
            }
            if (group0.size() < 2 || group1.size() < 2) continue;
            const auto t = stats::two_sample_t(group0, group1);
            auto pad = [](std::string s, std::size_t w) {
                if (s.size() < w) s += std::string(w - s.size(), ' ');
                return s;
            };
            table2 << pad(name, 20) << pad(fmt_fixed(t.mean_a, 3), 15)
                   << pad(fmt_fixed(t.mean_b, 3), 15)
                   << pad(fmt_fixed(t.mean_a - t.mean_b, 3) + stars(t.p), 12)
                   << pad(fmt_fixed(t.t_stat, 3), 10) << "\n";
        }
        std::size_t n0 = 0, n1 = 0;
        for (const auto& row : build.rows) (row.nor_f == 0 ? n0 : n1) += 1;
        table2 << "Observations        " << n0 << " / " << n1 << "\n";
        write_text(config.output_dir + "/report_table2.txt", table2.str());
    }

    write_manifest(config, "panel",
                   {config.output_dir + "/calls.jsonl",
                    data + "/forecasts_summary.csv", data + "/forecasts_detail.csv",
                    data + "/fundamentals.csv", data + "/daily_market.csv"},
                   {config.output_dir + "/panel.csv",
                    config.output_dir + "/individual_panel.csv",
                    config.output_dir + "/selection_ledger.txt"});
}

}  // namespace norq

#endif  // NORQ_PIPELINE_HPP_
