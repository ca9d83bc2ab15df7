// norq_main.cpp -- command-line driver for the non-response pipeline.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 backend
// error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "norq/config.hpp"
#include "norq/errors.hpp"
#include "norq/pipeline.hpp"
#include "norq/pipeline_reports.hpp"
#include "norq/synthetic.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::vector<std::string> overrides;       // --set assignments
    std::vector<std::string> flag_overrides;  // dedicated flags, applied last
    norq::RunConfig config;

    void materialize() {
        if (!config_path.empty()) config = norq::load_config_file(config_path);
        auto apply = [this](const std::vector<std::string>& assignments) {
            for (const auto& assignment : assignments) {
                const std::size_t eq = assignment.find('=');
                if (eq == std::string::npos)
                    throw norq::ConfigError("--set expects section.key=value, got '" +
                                            assignment + "'");
                norq::config_set(config, assignment.substr(0, eq),
                                 assignment.substr(eq + 1));
            }
        };
        apply(overrides);
        apply(flag_overrides);
    }
};

// Flags append to the override list so they always beat config-file values.
void add_common_options(CLI::App* cmd, CliState& state) {
    cmd->add_option("-c,--config", state.config_path, "run configuration file");
    cmd->add_option("--set", state.overrides,
                    "override a config value (section.key=value); repeatable");
    auto forward = [cmd, &state](const std::string& flag, const std::string& key,
                                 const std::string& help) {
        cmd->add_option_function<std::string>(
            flag,
            [&state, key](const std::string& value) {
                state.flag_overrides.push_back(key + "=" + value);
            },
            help);
    };
    forward("--corpus-dir", "paths.corpus_dir", "transcript directory");
    forward("--lexicon-dir", "paths.lexicon_dir", "word list directory");
    forward("--data-dir", "paths.data_dir", "CSV input directory");
    forward("--cache-dir", "paths.cache_dir", "annotation cache directory");
    forward("-o,--out", "paths.output_dir", "output directory");
    forward("--seed", "run.seed", "master seed");
    forward("--jobs", "run.jobs", "max in-flight backend requests");
    forward("--model", "backend.model_id", "primary model id");
    forward("--backend", "backend.kind", "backend kind: heuristic | scripted | http");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"norq: non-response measurement for earnings-call Q&A"};
    app.require_subcommand(1);

    CliState state;
    std::string synth_dir = "synthetic";
    int synth_firms = 42;
    int synth_quarters = 8;
    std::uint64_t synth_seed = 20240901;

    auto* ingest = app.add_subcommand("ingest", "parse and dedupe the transcript corpus");
    auto* annotate = app.add_subcommand("annotate", "run the annotation prompt per exchange");
    auto* measure = app.add_subcommand("measure", "aggregate annotations into measures");
    auto* panel = app.add_subcommand("panel", "assemble the firm-quarter panel");
    auto* regress = app.add_subcommand("regress", "estimate the regression table families");
    auto* bootstrap = app.add_subcommand("bootstrap", "bootstrap quarterly NOR ratios");
    auto* stability = app.add_subcommand("stability", "repetition match-ratio analysis");
    auto* overlap = app.add_subcommand("overlap", "two-model NOR overlap");
    auto* run_all = app.add_subcommand("run-all", "run every stage in order");
    auto* synth = app.add_subcommand("synth", "generate a synthetic demo dataset");

    for (CLI::App* cmd : {ingest, annotate, measure, panel, regress, bootstrap, stability,
                          overlap, run_all})
        add_common_options(cmd, state);
    synth->add_option("-o,--out", synth_dir, "target directory");
    synth->add_option("--firms", synth_firms, "number of firms");
    synth->add_option("--quarters", synth_quarters, "number of quarters");
    synth->add_option("--seed", synth_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            norq::SyntheticParams params;
            params.n_firms = synth_firms;
            params.n_quarters = synth_quarters;
            params.seed = synth_seed;
            norq::generate_synthetic(synth_dir, params);
            std::cout << "synthetic dataset written to " << synth_dir << " ("
                      << synth_firms << " firms x " << synth_quarters << " quarters)\n";
            std::cout << "run it with: norq run-all -c " << synth_dir << "/run.conf\n";
            return 0;
        }

        state.materialize();
        std::filesystem::create_directories(state.config.output_dir);

        if (ingest->parsed()) {
            const auto summary = norq::cmd_ingest(state.config);
            std::cout << "ingest: " << summary.files_seen << " files, "
                      << summary.parse_failures << " unparseable, "
                      << summary.transcripts << " canonical transcripts, "
                      << summary.exchanges << " exchanges\n";
        } else if (annotate->parsed()) {
            norq::cmd_annotate(state.config);
        } else if (measure->parsed()) {
            norq::cmd_measure(state.config);
            std::cout << "measure: reports written to " << state.config.output_dir << "\n";
        } else if (panel->parsed()) {
            norq::cmd_panel(state.config);
            std::cout << "panel: panel.csv and ledgers written to "
                      << state.config.output_dir << "\n";
        } else if (regress->parsed()) {
            norq::cmd_regress(state.config);
            std::cout << "regress: table reports written to " << state.config.output_dir
                      << "\n";
        } else if (bootstrap->parsed()) {
            norq::cmd_bootstrap(state.config);
            std::cout << "bootstrap: summaries written to " << state.config.output_dir
                      << "\n";
        } else if (stability->parsed()) {
            norq::cmd_stability(state.config);
            std::cout << "stability: match ratios written to " << state.config.output_dir
                      << "\n";
        } else if (overlap->parsed()) {
            norq::cmd_overlap(state.config);
            std::cout << "overlap: report written to " << state.config.output_dir << "\n";
        } else if (run_all->parsed()) {
            norq::cmd_run_all(state.config);
            std::cout << "run-all: complete; outputs in " << state.config.output_dir << "\n";
        }
        return 0;
    } catch (const norq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const norq::BackendUnavailable& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const norq::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
