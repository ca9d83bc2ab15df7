#include <doctest.h>

#include "norq/pipeline.hpp"
#include "norq/pipeline_reports.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "norq/synthetic.hpp"

using namespace norq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct Workspace {
    fs::path root;
    RunConfig config;
    SyntheticPlant plant;

    explicit Workspace(const std::string& tag, int firms = 8, int quarters = 4) {
        root = fs::temp_directory_path() / ("norq_pipeline_" + tag);
        fs::remove_all(root);
        SyntheticParams params;
        params.n_firms = firms;
        params.n_quarters = quarters;
        params.seed = 991;
        plant = generate_synthetic(root.string(), params);

        config.corpus_dir = (root / "corpus").string();
        config.lexicon_dir = std::string(NORQ_DATA_DIR) + "/lexicon";
        config.data_dir = (root / "inputs").string();
        config.cache_dir = (root / "out" / "cache").string();
        config.output_dir = (root / "out").string();
        config.second_kind = "scripted";
        config.second_model_id = "scripted-alt";
        config.second_scripted_fixture = (root / "inputs" / "scripted_second.jsonl").string();
        config.bootstrap_iterations = 500;
        config.permutation_count = 50;
        config.stability_reps = 3;
        config.stability_sample = 30;
        config.seed = 991;
    }

    ~Workspace() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("config parsing: sections, overrides, unknown keys, specs") {
    std::istringstream file(
        "# comment\n[paths]\ncorpus_dir = /tmp/c\n\n[run]\nseed = 42\n"
        "[flags]\nfog_strict_threshold = true\n"
        "[specs]\nmy_spec = error_firm ~ nor_firm | cluster(firm_id)\n");
    RunConfig config = load_config(file);
    CHECK(config.corpus_dir == "/tmp/c");
    CHECK(config.seed == 42);
    CHECK(config.fog_threshold() == 4);
    REQUIRE(config.extra_specs.size() == 1);
    CHECK(config.extra_specs[0].first == "my_spec");

    config_set(config, "run.jobs", "7");
    CHECK(config.jobs == 7);
    CHECK_THROWS_AS(config_set(config, "run.nonsense", "1"), ConfigError);
    CHECK_THROWS_AS(config_set(config, "flags.volume_log", "maybe"), ConfigError);
}

TEST_CASE("spec strings parse into regression specs") {
    const ParsedSpec p = parse_spec_string(
        "s1", "error_firm ~ nor_firm + size + nor_firm:size | fe(firm) | "
              "cluster(quarter) | filter(covid=1)");
    CHECK(p.spec.dependent == "error_firm");
    CHECK(p.spec.regressors == std::vector<std::string>{"nor_firm", "size"});
    REQUIRE(p.spec.interactions.size() == 1);
    CHECK(p.spec.interactions[0].first == "nor_firm");
    CHECK(p.spec.fe_firm);
    CHECK_FALSE(p.spec.fe_quarter);
    CHECK(p.spec.cluster == "quarter");
    REQUIRE(p.spec.filter.has_value());
    CHECK(p.spec.filter->first == "covid");
    CHECK_FALSE(p.is_logit);

    CHECK(parse_spec_string("s2", "nor_c ~ word | logit").is_logit);
    CHECK_THROWS_AS(parse_spec_string("bad", "no tilde here"), ConfigError);
}

TEST_CASE("ingest parses the synthetic corpus and keeps latest versions") {
    Workspace ws("ingest");
    const IngestSummary summary = cmd_ingest(ws.config);
    CHECK(summary.parse_failures == 0);
    CHECK(summary.superseded_dropped > 0);  // planted v1 duplicates
    CHECK(summary.transcripts == 8 * 4);
    CHECK(summary.exchanges == ws.plant.exchanges.size());

    // conver_ids line up with the planted truth
    const auto exchanges = read_corpus_jsonl(ws.config.output_dir + "/corpus.jsonl");
    REQUIRE(exchanges.size() == ws.plant.exchanges.size());
    std::set<std::string> parsed_ids, planted_ids;
    for (const auto& x : exchanges) parsed_ids.insert(x.conver_id);
    for (const auto& px : ws.plant.exchanges) planted_ids.insert(px.conver_id);
    CHECK(parsed_ids == planted_ids);
}

TEST_CASE("heuristic annotation recovers the planted truth exactly") {
    Workspace ws("annotate");
    cmd_ingest(ws.config);
    cmd_annotate(ws.config);
    const auto annotations =
        read_annotations(ws.config.output_dir + "/annotations_heuristic-v1.jsonl");
    std::map<std::string, const NorAnnotation*> by_id;
    for (const auto& ann : annotations) by_id[ann.conver_id] = &ann;
    REQUIRE(by_id.size() == ws.plant.exchanges.size());
    for (const auto& px : ws.plant.exchanges) {
        const NorAnnotation* ann = by_id.at(px.conver_id);
        CHECK(ann->nor_count == px.nor);
        REQUIRE(ann->categories.size() == px.categories.size());
        for (std::size_t i = 0; i < px.categories.size(); ++i)
            CHECK(ann->categories[i] == px.categories[i]);
    }
}

TEST_CASE("measure aggregates match the planted call counts") {
    Workspace ws("measure");
    cmd_ingest(ws.config);
    cmd_annotate(ws.config);
    cmd_measure(ws.config);
    const auto calls = read_call_measures_csv(ws.config.output_dir +
                                              "/call_measures_heuristic-v1.csv");
    REQUIRE(calls.size() == 8 * 4);
    for (const auto& m : calls) {
        CHECK(m.nor_firm == ws.plant.nor_firm.at(m.transcript_id));
        CHECK(m.nor_f == (m.nor_firm > 0 ? 1 : 0));
        int category_total = 0;
        for (const auto& [cat, count] : m.category_counts) category_total += count;
        CHECK(category_total == m.nor_firm);
    }
}

TEST_CASE("full pipeline produces every report family and a positive loading") {
    Workspace ws("runall", 10, 4);
    cmd_run_all(ws.config);

    for (const char* name :
         {"report_table1.txt", "report_table2.txt", "report_table3.txt",
          "report_table4.txt", "report_table5.txt", "report_table6.txt",
          "report_table7.txt", "report_table8.txt", "report_oa_table1.txt",
          "report_oa_table2.txt", "report_oa_table3.txt", "report_overlap.txt",
          "panel.csv", "individual_panel.csv", "selection_ledger.txt",
          "call_measures.csv", "conversation_measures.csv", "quarter_ratios.csv",
          "bootstrap_summary.csv", "stability.csv", "overlap.csv", "results_all.csv",
          "results_table3.csv"})
        CHECK_MESSAGE(fs::exists(fs::path(ws.config.output_dir) / name), name);

    // the planted data-generating process loads positively on NOR
    const CsvTable results = read_csv(ws.config.output_dir + "/results_all.csv");
    const auto spec_col = results.col("spec"), term_col = results.col("term");
    const auto coef_col = results.col("coef");
    bool found = false;
    for (const auto& row : results.rows) {
        if (row[spec_col] == "main_error_firm" && row[term_col] == "nor_firm") {
            CHECK(parse_double(row[coef_col]) > 0.0);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("same-seed re-run is byte-identical and uses the cache") {
    Workspace ws("determinism", 6, 3);
    cmd_run_all(ws.config);
    const std::vector<std::string> tracked = {
        "annotations_heuristic-v1.jsonl", "annotations_scripted-alt.jsonl",
        "call_measures_heuristic-v1.csv", "quarter_ratios_heuristic-v1.csv",
        "panel.csv", "individual_panel.csv", "results_all.csv",
        "bootstrap_summary.csv", "stability.csv", "overlap.csv"};
    std::map<std::string, std::string> first;
    for (const auto& name : tracked)
        first[name] = slurp(fs::path(ws.config.output_dir) / name);

    // second run: annotate must come entirely from cache
    const auto stats = cmd_annotate(ws.config);
    CHECK(stats.at("heuristic-v1").cached == ws.plant.exchanges.size());
    CHECK(stats.at("heuristic-v1").requested == 0);

    cmd_run_all(ws.config);
    for (const auto& name : tracked)
        CHECK_MESSAGE(slurp(fs::path(ws.config.output_dir) / name) == first[name], name);
}

TEST_CASE("ingest on an empty directory is a data error") {
    const fs::path dir = fs::temp_directory_path() / "norq_empty_corpus";
    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig config;
    config.corpus_dir = dir.string();
    config.output_dir = (dir / "out").string();
    CHECK_THROWS_AS(cmd_ingest(config), BadInputFile);
    fs::remove_all(dir);
}

TEST_CASE("manifest records config hash and input hashes") {
    Workspace ws("manifest");
    cmd_ingest(ws.config);
    const auto manifest = nlohmann::json::parse(
        slurp(fs::path(ws.config.output_dir) / "manifest_ingest.json"));
    CHECK(manifest.at("stage") == "ingest");
    CHECK(manifest.at("seed") == 991);
    CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
    CHECK(manifest.at("inputs").size() > 0);
    CHECK(manifest.at("outputs").contains(ws.config.output_dir + "/corpus.jsonl"));
}
