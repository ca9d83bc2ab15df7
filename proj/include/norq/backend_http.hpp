// backend_http.hpp -- remote chat-completion backend over HTTP POST.
//
// Body: {model, messages[system,user], temperature, frequency_penalty,
// presence_penalty, max_tokens}; reply: choices[0].message.content.
// Bounded retry with exponential backoff; retries are reported back so the
// elicitor can record them on the annotation.

#ifndef NORQ_BACKEND_HTTP_HPP_
#define NORQ_BACKEND_HTTP_HPP_

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
// httplib pulls in <resolv.h>, whose `_res` macro mangles any later header
// that uses _res as an identifier (Eigen does)
#ifdef _res
#undef _res
#endif
#include <json.hpp>

#include "norq/backend.hpp"
#include "norq/errors.hpp"

namespace norq {

struct HttpBackendConfig {
    std::string host;                    // e.g. "api.example.com" or "localhost:8089"
    std::string path = "/v1/chat/completions";
    std::string model_id = "remote";
    std::string api_key_env = "NORQ_API_KEY";
    int max_retries = 3;                 // attempts after the first
    int timeout_seconds = 60;
    int backoff_initial_ms = 250;        // doubles each retry
    bool backoff_sleep = true;           // tests disable the real sleep
};

class HttpBackend final : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::string model_id() const override { return config_.model_id; }

    Completion send(const PromptRequest& request) override {
        nlohmann::json body;
        body["model"] = config_.model_id;
        body["messages"] = {
            {{"role", "system"}, {"content", request.system_message}},
            {{"role", "user"}, {"content", request.user_prompt}},
        };
        body["temperature"] = request.params.temperature;
        body["frequency_penalty"] = request.params.frequency_penalty;
        body["presence_penalty"] = request.params.presence_penalty;
        body["max_tokens"] = request.params.max_tokens;
        const std::string payload = body.dump();

        httplib::Client client(config_.host);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);

        int retries = 0;
        int backoff_ms = config_.backoff_initial_ms;
        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                ++retries;
                if (config_.backoff_sleep)
                    std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
            auto res = client.Post(config_.path, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error (" + httplib::to_string(res.error()) + ")";
                continue;
            }
            if (res->status == 200) {
                const auto reply = nlohmann::json::parse(res->body, nullptr, false);
                if (reply.is_discarded())
                    return {res->body, retries};  // let validate_reply decide
                if (reply.contains("choices") && !reply["choices"].empty())
                    return {reply["choices"][0].value(
                                "message", nlohmann::json::object()).value("content", res->body),
                            retries};
                return {res->body, retries};
            }
            last_error = "HTTP " + std::to_string(res->status);
            if (res->status >= 400 && res->status < 500 && res->status != 429)
                break;  // not retryable
        }
        throw BackendUnavailable("backend " + config_.model_id + " at " + config_.host +
                                 ": " + last_error);
    }

private:
    HttpBackendConfig config_;
};

}  // namespace norq

#endif  // NORQ_BACKEND_HTTP_HPP_
