// backend.hpp -- model backends: the send(PromptRequest) -> completion
// capability plus the two offline implementations (scripted fixtures and
// the deterministic cue-phrase heuristic). The HTTP backend lives in
// backend_http.hpp so that httplib is only pulled in where needed.

#ifndef NORQ_BACKEND_HPP_
#define NORQ_BACKEND_HPP_

#include <array>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "norq/annotation.hpp"
#include "norq/errors.hpp"
#include "norq/prompt.hpp"
#include "norq/text.hpp"

namespace norq {

struct Completion {
    std::string text;
    int retries = 0;  // transport retries spent on this request
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string model_id() const = 0;
    // Returns the completion. Throws BackendUnavailable on transport
    // failure after the transport's own bounded retries.
    virtual Completion send(const PromptRequest& request) = 0;
};

// --- scripted fixture backend --------------------------------------------

// JSONL fixture: {"conver_id": ..., "completion": ...} per line. Missing
// ids are an error so fixture gaps fail loudly.
class ScriptedBackend final : public ModelBackend {
public:
    ScriptedBackend(std::string model_id, std::map<std::string, std::string> completions)
        : model_id_(std::move(model_id)), completions_(std::move(completions)) {}

    static ScriptedBackend from_file(const std::string& model_id, const std::string& path) {
        std::ifstream in(path);
        if (!in) throw BackendUnavailable("cannot open scripted fixture " + path);
        std::map<std::string, std::string> completions;
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const auto j = nlohmann::json::parse(line);
            completions[j.at("conver_id").get<std::string>()] =
                j.at("completion").get<std::string>();
        }
        return ScriptedBackend(model_id, std::move(completions));
    }

    std::string model_id() const override { return model_id_; }

    Completion send(const PromptRequest& request) override {
        const auto it = completions_.find(request.conver_id);
        if (it == completions_.end())
            throw BackendUnavailable("no scripted completion for " + request.conver_id);
        return {it->second, 0};
    }

private:
    std::string model_id_;
    std::map<std::string, std::string> completions_;
};

// --- heuristic backend ----------------------------------------------------

namespace detail {

struct StatementTurn {
    SpeakerRole role = SpeakerRole::Other;
    std::string text;
};

// Parses `[Role][Name]: "text"` lines back out of a rendered Statement slot.
inline std::vector<StatementTurn> parse_statement(std::string_view statement) {
    std::vector<StatementTurn> turns;
    std::size_t pos = 0;
    while (pos < statement.size()) {
        std::size_t eol = statement.find('\n', pos);
        if (eol == std::string_view::npos) eol = statement.size();
        std::string_view line = statement.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line[0] != '[') continue;
        const std::size_t role_end = line.find(']');
        if (role_end == std::string_view::npos) continue;
        StatementTurn turn;
        turn.role = role_from_label(line.substr(1, role_end - 1));
        std::size_t q = line.find('"', role_end);
        if (q == std::string_view::npos) continue;
        std::string text;
        for (std::size_t i = q + 1; i < line.size(); ++i) {
            if (line[i] == '\\' && i + 1 < line.size()) text.push_back(line[++i]);
            else if (line[i] == '"') break;
            else text.push_back(line[i]);
        }
        turn.text = std::move(text);
        turns.push_back(std::move(turn));
    }
    return turns;
}

// The Statement slot of a rendered prompt (text between the final
// "Statement=" marker and the trailing "Responses =").
inline std::string statement_slot(const std::string& user_prompt) {
    const std::string marker = "Statement=";
    const std::size_t start = user_prompt.rfind(marker);
    if (start == std::string::npos) return user_prompt;
    std::size_t begin = start + marker.size();
    std::size_t end = user_prompt.find("\n\nResponses =", begin);
    if (end == std::string::npos) end = user_prompt.size();
    return user_prompt.substr(begin, end - begin);
}

}  // namespace detail

// Deterministic offline annotator. Manager turns are matched against cue
// phrases per category; each cued manager turn contributes one NOR pair
// with the preceding analyst question. Scores come from a fixed lookup on
// the first matched cue class.
class HeuristicBackend final : public ModelBackend {
public:
    explicit HeuristicBackend(std::string model_id = "heuristic-v1")
        : model_id_(std::move(model_id)) {}

    std::string model_id() const override { return model_id_; }

    Completion send(const PromptRequest& request) override {
        const auto turns = detail::parse_statement(detail::statement_slot(request.user_prompt));

        NorAnnotation ann;
        ann.nor_count = 0;
        std::string last_analyst_text;
        for (const auto& turn : turns) {
            if (turn.role == SpeakerRole::Analyst) {
                last_analyst_text = turn.text;
                continue;
            }
            if (turn.role != SpeakerRole::Manager) continue;
            const auto category = match_cue(turn.text);
            if (!category) continue;
            if (ann.nor_count < kMaxNorCount) {
                ++ann.nor_count;
                ann.pairs.push_back({last_analyst_text, turn.text});
                ann.categories.push_back(*category);
            }
        }

        const auto scores = score_lookup(ann.categories.empty()
                                             ? std::nullopt
                                             : std::optional<NorCategory>(ann.categories[0]));
        ann.quantity = scores[0];
        ann.relevance = scores[1];
        ann.clarity = scores[2];
        return {annotation_to_reply(ann), 0};
    }

    // Exposed for tests.
    static std::optional<NorCategory> match_cue(std::string_view manager_text) {
        const std::string u = upper_copy(manager_text);
        static const std::vector<std::pair<NorCategory, std::vector<std::string>>> cues = {
            {NorCategory::LegalAffairs,
             {"LEGAL RESTRICTIONS", "LEGAL REASONS", "ADVICE OF COUNSEL",
              "PENDING LITIGATION", "LEGAL CONSTRAINTS"}},
            {NorCategory::Recall,
             {"GET BACK TO YOU", "CIRCLE BACK", "FOLLOW UP WITH YOU",
              "REVISIT THAT QUESTION", "COME BACK TO THAT"}},
            {NorCategory::LackOfInfo,
             {"I DON'T KNOW", "DON'T HAVE THAT INFORMATION", "DON'T HAVE THE DATA",
              "DON'T HAVE THAT DETAIL", "NOT AWARE OF THE SPECIFICS"}},
            {NorCategory::Refusal,
             {"CAN'T ANSWER", "CANNOT ANSWER", "NOT GOING TO ANSWER", "NO COMMENT",
              "WON'T COMMENT", "DECLINE TO ANSWER", "NOT PREPARED TO DISCUSS"}},
            {NorCategory::Irrelevant,
             {"LET ME TALK ABOUT SOMETHING ELSE", "ON AN UNRELATED NOTE",
              "WHAT I REALLY WANT TO HIGHLIGHT"}},
        };
        for (const auto& [category, phrases] : cues)
            for (const auto& phrase : phrases)
                if (u.find(phrase) != std::string::npos) return category;
        return std::nullopt;
    }

private:
    static std::array<int, 3> score_lookup(std::optional<NorCategory> category) {
        if (!category) return {8, 9, 9};
        switch (*category) {
            case NorCategory::Refusal: return {2, 3, 7};
            case NorCategory::LackOfInfo: return {3, 8, 8};
            case NorCategory::LegalAffairs: return {3, 6, 8};
            case NorCategory::Recall: return {4, 7, 8};
            case NorCategory::Irrelevant: return {3, 2, 5};
            default: return {5, 5, 5};
        }
    }

    std::string model_id_;
};

}  // namespace norq

#endif  // NORQ_BACKEND_HPP_
