// config.hpp -- run configuration: plain-text key=value with [section]
// headers. Command-line flags override file values; every stochastic stage
// draws from the single master seed.

#ifndef NORQ_CONFIG_HPP_
#define NORQ_CONFIG_HPP_

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "norq/errors.hpp"
#include "norq/text.hpp"

namespace norq {

struct RunConfig {
    // paths
    std::string corpus_dir = "data/corpus";
    std::string lexicon_dir = "data/lexicon";
    std::string data_dir = "data/inputs";
    std::string cache_dir = "out/cache";
    std::string output_dir = "out";

    // backend
    std::string backend_kind = "heuristic";  // heuristic | scripted | http
    std::string model_id = "heuristic-v1";
    std::string scripted_fixture;
    std::string endpoint_host;
    std::string endpoint_path = "/v1/chat/completions";
    std::string api_key_env = "NORQ_API_KEY";
    int max_retries = 3;
    int timeout_seconds = 60;

    // optional second model (overlap / alternative-measure tables)
    std::string second_kind;
    std::string second_model_id;
    std::string second_scripted_fixture;

    // prompt parameters
    double temperature = 0.0;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    int max_tokens = 5000;

    // run
    std::uint64_t seed = 20240901;
    int jobs = 4;
    std::size_t bootstrap_iterations = 100000;
    std::size_t permutation_count = 10000;
    int stability_reps = 5;
    int stability_sample = 100;

    // flags
    bool fog_strict_threshold = false;   // complex words need > 3 syllables
    bool exchange_metrics_all_turns = false;
    bool volume_log = true;
    bool winsor_per_quarter = false;
    double winsor_lower = 0.01;
    double winsor_upper = 0.99;
    bool h_rd_by_rd_expense = false;

    // user-declared regression specs: name -> "dep ~ x1 + x2 | ..." strings
    std::vector<std::pair<std::string, std::string>> extra_specs;

    int fog_threshold() const { return fog_strict_threshold ? 4 : 3; }
};

namespace detail {

inline bool parse_bool(const std::string& value, const std::string& key) {
    const std::string u = upper_copy(value);
    if (u == "TRUE" || u == "YES" || u == "1" || u == "ON") return true;
    if (u == "FALSE" || u == "NO" || u == "0" || u == "OFF") return false;
    throw ConfigError("bad boolean for " + key + ": '" + value + "'");
}

}  // namespace detail

// Applies one "section.key=value" assignment. Unknown keys are an error.
inline void config_set(RunConfig& config, const std::string& dotted_key,
                       const std::string& value) {
    using detail::parse_bool;
    auto as_int = [&](const char* key) {
        try { return static_cast<int>(std::stol(value)); }
        catch (...) { throw ConfigError(std::string("bad integer for ") + key); }
    };
    auto as_u64 = [&](const char* key) {
        try { return static_cast<std::uint64_t>(std::stoull(value)); }
        catch (...) { throw ConfigError(std::string("bad integer for ") + key); }
    };
    auto as_size = [&](const char* key) {
        try { return static_cast<std::size_t>(std::stoull(value)); }
        catch (...) { throw ConfigError(std::string("bad integer for ") + key); }
    };
    auto as_double = [&](const char* key) {
        try { return std::stod(value); }
        catch (...) { throw ConfigError(std::string("bad number for ") + key); }
    };

    const std::string& k = dotted_key;
    if (k.rfind("specs.", 0) == 0) {
        const std::string name = k.substr(6);
        for (auto& [existing, body] : config.extra_specs)
            if (existing == name) { body = value; return; }
        config.extra_specs.emplace_back(name, value);
        return;
    }
    if (k == "paths.corpus_dir") config.corpus_dir = value;
    else if (k == "paths.lexicon_dir") config.lexicon_dir = value;
    else if (k == "paths.data_dir") config.data_dir = value;
    else if (k == "paths.cache_dir") config.cache_dir = value;
    else if (k == "paths.output_dir") config.output_dir = value;
    else if (k == "backend.kind") config.backend_kind = value;
    else if (k == "backend.model_id") config.model_id = value;
    else if (k == "backend.scripted_fixture") config.scripted_fixture = value;
    else if (k == "backend.endpoint_host") config.endpoint_host = value;
    else if (k == "backend.endpoint_path") config.endpoint_path = value;
    else if (k == "backend.api_key_env") config.api_key_env = value;
    else if (k == "backend.max_retries") config.max_retries = as_int(k.c_str());
    else if (k == "backend.timeout_seconds") config.timeout_seconds = as_int(k.c_str());
    else if (k == "backend.second_kind") config.second_kind = value;
    else if (k == "backend.second_model_id") config.second_model_id = value;
    else if (k == "backend.second_scripted_fixture") config.second_scripted_fixture = value;
    else if (k == "prompt.temperature") config.temperature = as_double(k.c_str());
    else if (k == "prompt.frequency_penalty") config.frequency_penalty = as_double(k.c_str());
    else if (k == "prompt.presence_penalty") config.presence_penalty = as_double(k.c_str());
    else if (k == "prompt.max_tokens") config.max_tokens = as_int(k.c_str());
    else if (k == "run.seed") config.seed = as_u64(k.c_str());
    else if (k == "run.jobs") config.jobs = as_int(k.c_str());
    else if (k == "run.bootstrap_iterations")
        config.bootstrap_iterations = as_size(k.c_str());
    else if (k == "run.permutation_count") config.permutation_count = as_size(k.c_str());
    else if (k == "run.stability_reps") config.stability_reps = as_int(k.c_str());
    else if (k == "run.stability_sample") config.stability_sample = as_int(k.c_str());
    else if (k == "flags.fog_strict_threshold")
        config.fog_strict_threshold = parse_bool(value, k);
    else if (k == "flags.exchange_metrics_all_turns")
        config.exchange_metrics_all_turns = parse_bool(value, k);
    else if (k == "flags.volume_log") config.volume_log = parse_bool(value, k);
    else if (k == "flags.winsor_per_quarter") config.winsor_per_quarter = parse_bool(value, k);
    else if (k == "flags.winsor_lower") config.winsor_lower = as_double(k.c_str());
    else if (k == "flags.winsor_upper") config.winsor_upper = as_double(k.c_str());
    else if (k == "flags.h_rd_by_rd_expense")
        config.h_rd_by_rd_expense = parse_bool(value, k);
    else throw ConfigError("unknown config key '" + dotted_key + "'");
}

inline RunConfig load_config(std::istream& in) {
    RunConfig config;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        if (stripped.front() == '[' && stripped.back() == ']') {
            section = trim(stripped.substr(1, stripped.size() - 2));
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        config_set(config, section.empty() ? key : section + "." + key, value);
    }
    return config;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return load_config(in);
}

// Canonical serialization used for the manifest's config hash.
inline std::string config_to_string(const RunConfig& c) {
    std::ostringstream out;
    out << "paths.corpus_dir=" << c.corpus_dir << "\n"
        << "paths.lexicon_dir=" << c.lexicon_dir << "\n"
        << "paths.data_dir=" << c.data_dir << "\n"
        << "paths.cache_dir=" << c.cache_dir << "\n"
        << "paths.output_dir=" << c.output_dir << "\n"
        << "backend.kind=" << c.backend_kind << "\n"
        << "backend.model_id=" << c.model_id << "\n"
        << "backend.scripted_fixture=" << c.scripted_fixture << "\n"
        << "backend.endpoint_host=" << c.endpoint_host << "\n"
        << "backend.endpoint_path=" << c.endpoint_path << "\n"
        << "backend.api_key_env=" << c.api_key_env << "\n"
        << "backend.max_retries=" << c.max_retries << "\n"
        << "backend.timeout_seconds=" << c.timeout_seconds << "\n"
        << "backend.second_kind=" << c.second_kind << "\n"
        << "backend.second_model_id=" << c.second_model_id << "\n"
        << "backend.second_scripted_fixture=" << c.second_scripted_fixture << "\n"
        << "prompt.temperature=" << c.temperature << "\n"
        << "prompt.frequency_penalty=" << c.frequency_penalty << "\n"
        << "prompt.presence_penalty=" << c.presence_penalty << "\n"
        << "prompt.max_tokens=" << c.max_tokens << "\n"
        << "run.seed=" << c.seed << "\n"
        << "run.jobs=" << c.jobs << "\n"
        << "run.bootstrap_iterations=" << c.bootstrap_iterations << "\n"
        << "run.permutation_count=" << c.permutation_count << "\n"
        << "run.stability_reps=" << c.stability_reps << "\n"
        << "run.stability_sample=" << c.stability_sample << "\n"
        << "flags.fog_strict_threshold=" << c.fog_strict_threshold << "\n"
        << "flags.exchange_metrics_all_turns=" << c.exchange_metrics_all_turns << "\n"
        << "flags.volume_log=" << c.volume_log << "\n"
        << "flags.winsor_per_quarter=" << c.winsor_per_quarter << "\n"
        << "flags.winsor_lower=" << c.winsor_lower << "\n"
        << "flags.winsor_upper=" << c.winsor_upper << "\n"
        << "flags.h_rd_by_rd_expense=" << c.h_rd_by_rd_expense << "\n";
    for (const auto& [name, body] : c.extra_specs)
        out << "specs." << name << "=" << body << "\n";
    return out.str();
}

}  // namespace norq

#endif  // NORQ_CONFIG_HPP_
