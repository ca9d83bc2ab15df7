// prompt.hpp -- the three-task annotation prompt and its renderer.
//
// The template is frozen: render_prompt() may only vary the Statement slot.
// A golden copy lives in tests/fixtures/prompt_template.golden and the test
// suite diffs rendered prompts against it byte by byte.

#ifndef NORQ_PROMPT_HPP_
#define NORQ_PROMPT_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "norq/corpus.hpp"
#include "norq/errors.hpp"

namespace norq {

inline constexpr const char* kPromptTemplateVersion = "norq-prompt-v1";

inline constexpr const char* kSystemMessage =
    "You are a helpful research assistant in accounting and finance.";

// Few-shot demonstration 1: a question answered with a lack-of-information
// justification.
inline constexpr const char* kExampleStatement1 =
    R"([Analyst]: "And the Dubai client, are they a financially distressed client? Just kind of characterize how you feel about being able to ultimately collect from them."
[Manager]: "Yes. No. So we have no knowledge that the client has any financial issue or is unable to pay. The reserve was really a function of the aging of the receivables and the inability for us, along with the client to agree upon a revised payment plan. And really, at that point, we felt it was appropriate to take the reserve. But it has nothing to do with any knowledge or understanding of an inability to pay.")";

inline constexpr const char* kExampleResponse1 =
    R"({
"NOR": 1,
"Pair": [{
[Analyst]: "And the Dubai client, are they a financially distressed client? Just kind of characterize how you feel about being able to ultimately collect from them.",
[Manager]: "Yes. No. So we have no knowledge that the client has any financial issue or is unable to pay. The reserve was really a function of the aging of the receivables and the inability for us, along with the client to agree upon a revised payment plan. And really, at that point, we felt it was appropriate to take the reserve. But it has nothing to do with any knowledge or understanding of an inability to pay." },]
"Quantity": Lack of Info,
"Quantity": 3,
"Relevance": 10,
"Clarity": 10
})";

inline constexpr const char* kExampleStatement2 =
    R"([Analysts][James Salera]: "You've already discussed some of the trends with Quest in the category. But I was wondering if you could give us a sense for how much of the broader category growth is being driven by the expansion of products and the appeal that, that brings to expand buy rates versus consumers that are increasingly health conscious kind of engaging with these protein dense cohorts, low-calorie snacks?"
[Executives][Geoff Tanner]: "Yes. No, it's a good question. I don't have that information at a category level. As we look at our brands, we certainly see a balance across both household penetration and buy rate. And as I said, again, to Matt's - with Matt's question, this category largely grew up as bars and shakes. And over time, has expanded well beyond that new format, new usage occasions, new dayparts.")";

inline constexpr const char* kExampleResponse2 =
    R"({
"NOR": 1,
"Pair": [{
[Analysts][James Salera]: "You've already discussed some of the trends with Quest in the category. But I was wondering if you could give us a sense for how much of the broader category growth is being driven by the expansion of products and the appeal that, that brings to expand buy rates versus consumers that are increasingly health conscious kind of engaging with these protein dense cohorts, low-calorie snacks?",
[Executives][Geoff Tanner]: "Yes. No, it's a good question. I don't have that information at a category level. As we look at our brands, we certainly see a balance across both household penetration and buy rate. And as I said, again, to Matt's - with Matt's question, this category largely grew up as bars and shakes. And over time, has expanded well beyond that new format, new usage occasions, new dayparts." },]
"Quantity": Lack of Info,
"Quantity": 4,
"Relevance": 9,
"Clarity": 8
})";

// Everything before the Statement slot.
inline std::string prompt_prefix() {
    std::string s;
    s += "The provided document is a conversation between an analyst and a manager during a company's earnings call.\n";
    s += "\n";
    s += "The types of speakers are shown in square brackets as [\"Speaker Type\"], followed by the content of the speech of corresponding speakers.\n";
    s += "\n";
    s += "You have three tasks to finish:\n";
    s += "\n";
    s += "Task 1 - Identify Non-Response Q&A Exchanges:\n";
    s += "\n";
    s += "- Extract Q&A exchanges where managers explicitly refused to answer the analyst's question, using responses such as \"I can't answer\" or \"I don't know.\"\n";
    s += "- Extract Q&A exchanges where managers provided answers that were irrelevant and did not address the analyst's question.\n";
    s += "- Exclude Q&A exchanges where managers sought clarification of the question or got disconnected.\n";
    s += "\n";
    s += "Task 2 - Classify the non-responses. If any non-responses were identified in Task 1, classify it into one of the five categories:\n";
    s += "\n";
    s += "- Refusal: if managers directly refuse to answer the question without giving any justifications.\n";
    s += "- Lack of Info: if managers indicate their lack of relevant information to answer the question.\n";
    s += "- Legal Affairs: managers can't provide answers due to legal restrictions.\n";
    s += "- Recall: if managers indicate they will get back to the question sometime in the future.\n";
    s += "- Irrelevant: if managers give irrelevant answers.\n";
    s += "- If you didn't identify any non-responses in Task 1, return null for this task.\n";
    s += "\n";
    s += "Task 3 - Evaluate and rate managers' overall responses on a scale of 0-10 from three aspects: quantity, relevance, and clarity. Please note 0 means least informative, relevant and clear, while 10 indicates most informative, relevant and clear.\n";
    s += "\n";
    s += "- Quantity: rate managers' responses according to the amount of incremental information provided in their answers.\n";
    s += "- Relevance: rate managers' responses based on the relevance of their answers to the analyst's questions.\n";
    s += "- Clarity: rate managers' responses based on the clarity of their answers.\n";
    s += "\n";
    s += "After finishing the two tasks, output your response in following JSON format: {\n";
    s += "\"NOR\": 1, If any Non-Response Q&A Exchanges were identified; 0, if no Non-Response Q&A Exchanges were identified,\n";
    s += "\"Pair\": [Store both the question and the answer in the list if any Non-response Q&A Exchanges were identified, or write null, if not any pairs identified]\n";
    s += "\"Category\": Store the result from Task 2\n";
    s += "\"Quantity\": Score of quantity,\n";
    s += "\"Relevance\": Score of relevance,\n";
    s += "\"Clarity\": Score of clarity\n";
    s += "}\n";
    s += "\n";
    s += "Here are two examples for your references:\n";
    s += "\n";
    s += "[Example 1]:\n";
    s += "\n";
    s += "Statement=";
    s += kExampleStatement1;
    s += "\n\nResponses = ";
    s += kExampleResponse1;
    s += "\n\n[Example 2]:\n";
    s += "\n";
    s += "Statement=";
    s += kExampleStatement2;
    s += "\n\nResponses = ";
    s += kExampleResponse2;
    s += "\n\n";
    s += "****Important Rules: ****\n";
    s += "\n";
    s += "- Strictly adhere to the output formats as provided above.\n";
    s += "- For every transcript, there should be only one library being output.\n";
    s += "- If there are more than one pair of exchanges which have no responses, store all of them as value for \"Pair\" separated by \",\" in the list.\n";
    s += "- For Task 3, you should generate the scores based on the managers' overall responses.\n";
    s += "\n";
    s += "Begin the analysis now.\n";
    s += "\n";
    s += "Statement=";
    return s;
}

// Everything after the Statement slot.
inline std::string prompt_suffix() {
    return "\n\nResponses =\n";
}

struct PromptParams {
    double temperature = 0.0;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    int max_tokens = 5000;
};

struct PromptRequest {
    std::string conver_id;
    std::string system_message;
    std::string user_prompt;
    PromptParams params;
};

namespace detail {

inline void append_escaped(std::string& out, std::string_view text) {
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
}

}  // namespace detail

// The Statement slot body: one `[Role][Name]: "text"` line per turn.
inline std::string render_statement(const QAExchange& x) {
    std::string s;
    for (const Turn& t : x.turns) {
        if (!s.empty()) s += "\n";
        s += "[" + role_name(t.speaker_role) + "]";
        if (!t.speaker_name.empty()) s += "[" + t.speaker_name + "]";
        s += ": \"";
        detail::append_escaped(s, t.text);
        s += "\"";
    }
    return s;
}

inline PromptRequest render_prompt(const QAExchange& x, PromptParams params = {}) {
    if (!x.has_role(SpeakerRole::Analyst) || !x.has_role(SpeakerRole::Manager))
        throw Error("render_prompt: exchange " + x.conver_id +
                    " needs at least one analyst and one manager turn");
    PromptRequest req;
    req.conver_id = x.conver_id;
    req.system_message = kSystemMessage;
    req.user_prompt = prompt_prefix() + render_statement(x) + prompt_suffix();
    req.params = params;
    return req;
}

// FNV-1a, for cache keys and manifests (not cryptographic).
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Template edits, statement changes, and parameter changes all invalidate
// the cache through this hash.
inline std::string prompt_hash(const PromptRequest& req) {
    std::uint64_t h = fnv1a(kPromptTemplateVersion);
    h = fnv1a(req.system_message, h);
    h = fnv1a(req.user_prompt, h);
    char params[128];
    std::snprintf(params, sizeof(params), "t=%.6f;f=%.6f;p=%.6f;m=%d",
                  req.params.temperature, req.params.frequency_penalty,
                  req.params.presence_penalty, req.params.max_tokens);
    h = fnv1a(params, h);
    return hash_hex(h);
}

}  // namespace norq

#endif  // NORQ_PROMPT_HPP_
