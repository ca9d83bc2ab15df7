// elicitor.hpp -- prompt dispatch with an idempotent annotation cache.
//
// Cache file: append-only JSONL, one NorAnnotation per line, keyed by
// (model_id, conver_id, prompt_hash). Re-running over a fully cached
// corpus issues zero backend calls; template or parameter edits change the
// prompt hash and force re-annotation. Up to `jobs` requests are in flight
// at once; the cache writer is serialized; output order is by
// (transcript_id, order) regardless of completion order.

#ifndef NORQ_ELICITOR_HPP_
#define NORQ_ELICITOR_HPP_

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "norq/annotation.hpp"
#include "norq/backend.hpp"
#include "norq/corpus.hpp"
#include "norq/errors.hpp"
#include "norq/prompt.hpp"

namespace norq {

class AnnotationCache {
public:
    explicit AnnotationCache(std::string path) : path_(std::move(path)) { load(); }

    const NorAnnotation* lookup(const std::string& conver_id, const std::string& model_id,
                                const std::string& prompt_hash) const {
        const auto it = entries_.find(key(conver_id, model_id));
        if (it == entries_.end() || it->second.prompt_hash != prompt_hash) return nullptr;
        return &it->second;
    }

    void append(const NorAnnotation& ann) {
        std::lock_guard<std::mutex> lock(write_mutex_);
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        if (!out) throw Error("cannot append to cache " + path_);
        out << annotation_to_json(ann).dump() << "\n";
        entries_[key(ann.conver_id, ann.model_id)] = ann;
    }

    std::size_t size() const { return entries_.size(); }

private:
    static std::string key(const std::string& conver_id, const std::string& model_id) {
        return model_id + "\x1f" + conver_id;
    }

    void load() {
        std::ifstream in(path_);
        if (!in) return;  // fresh cache
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;  // torn tail line from an interrupt
            NorAnnotation ann = annotation_from_json(j);
            entries_[key(ann.conver_id, ann.model_id)] = ann;  // last one wins
        }
    }

    std::string path_;
    std::mutex write_mutex_;
    std::map<std::string, NorAnnotation> entries_;
};

struct AnnotateStats {
    std::size_t total = 0;
    std::size_t cached = 0;
    std::size_t requested = 0;
    std::size_t errors = 0;   // ERROR annotations among the results
    std::size_t retries = 0;  // transport retries recorded
};

// Annotates every exchange exactly once per (model, prompt-hash). Throws
// BackendUnavailable if a request fails after its bounded retries; the
// cache keeps everything finished so a re-run resumes where it stopped.
inline std::vector<NorAnnotation> annotate_corpus(const std::vector<QAExchange>& exchanges,
                                                  ModelBackend& backend,
                                                  AnnotationCache& cache,
                                                  PromptParams params = {},
                                                  int jobs = 4,
                                                  AnnotateStats* stats_out = nullptr) {
    struct Pending {
        std::size_t slot;
        PromptRequest request;
    };

    std::vector<NorAnnotation> results(exchanges.size());
    std::vector<Pending> pending;
    AnnotateStats stats;
    stats.total = exchanges.size();

    for (std::size_t i = 0; i < exchanges.size(); ++i) {
        PromptRequest request = render_prompt(exchanges[i], params);
        const std::string hash = prompt_hash(request);
        if (const NorAnnotation* hit = cache.lookup(request.conver_id, backend.model_id(), hash)) {
            results[i] = *hit;
            ++stats.cached;
        } else {
            pending.push_back({i, std::move(request)});
        }
    }

    if (!pending.empty()) {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;
        std::atomic<std::size_t> retries{0};

        auto worker = [&]() {
            while (true) {
                const std::size_t k = next.fetch_add(1);
                if (k >= pending.size()) return;
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (first_error) return;  // stop issuing new requests
                }
                try {
                    const Pending& p = pending[k];
                    const Completion completion = backend.send(p.request);
                    NorAnnotation ann = validate_reply(completion.text);
                    ann.conver_id = p.request.conver_id;
                    ann.model_id = backend.model_id();
                    ann.prompt_hash = prompt_hash(p.request);
                    ann.retries = completion.retries;
                    cache.append(ann);
                    results[p.slot] = ann;
                    retries += static_cast<std::size_t>(std::max(0, completion.retries));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };

        const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(pending.size())));
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (first_error) std::rethrow_exception(first_error);

        stats.requested = pending.size();
        stats.retries = retries.load();
    }

    std::sort(results.begin(), results.end(),
              [](const NorAnnotation& a, const NorAnnotation& b) {
                  const std::string ta = transcript_of(a.conver_id), tb = transcript_of(b.conver_id);
                  if (ta != tb) return ta < tb;
                  return order_of(a.conver_id) < order_of(b.conver_id);
              });

    for (const auto& ann : results)
        if (ann.is_error()) ++stats.errors;
    if (stats_out) *stats_out = stats;
    return results;
}

// JSONL I/O for annotation sets outside the cache (fixtures, exports).
inline void write_annotations(const std::string& path, const std::vector<NorAnnotation>& anns) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    for (const auto& ann : anns) out << annotation_to_json(ann).dump() << "\n";
}

inline std::vector<NorAnnotation> read_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<NorAnnotation> anns;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        anns.push_back(annotation_from_json(nlohmann::json::parse(line)));
    }
    return anns;
}

}  // namespace norq

#endif  // NORQ_ELICITOR_HPP_
