#include "specplan/model_client_http.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace specplan {

namespace {

using nlohmann::json;

std::string role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

// Splits a URL into origin (scheme://host[:port]) and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ModelError(ModelErrorKind::Config, "endpoint must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpModelClient::HttpModelClient(Clock& clock, HttpClientConfig config)
    : clock_(clock), config_(std::move(config)) {
    std::tie(origin_, path_) = split_url(config_.endpoint);
}

HttpModelClient HttpModelClient::from_env(Clock& clock) {
    HttpClientConfig cfg;
    const char* endpoint = std::getenv("MODEL_ENDPOINT");
    if (endpoint == nullptr || *endpoint == '\0')
        throw ModelError(ModelErrorKind::Config, "MODEL_ENDPOINT is not set");
    cfg.endpoint = endpoint;
    if (const char* key = std::getenv("MODEL_API_KEY")) cfg.api_key = key;
    return HttpModelClient(clock, std::move(cfg));
}

GenerationResult HttpModelClient::generate(const GenerationRequest& req, const AbortSignal& abort) {
    if (req.messages.empty())
        throw ModelError(ModelErrorKind::Config, "generation request has no messages");

    json body;
    body["model"] = config_.model_name;
    body["temperature"] = req.temperature;
    body["top_p"] = req.top_p;
    body["max_tokens"] = req.max_output_tokens;
    json messages = json::array();
    for (const auto& m : req.messages)
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    body["messages"] = messages;

    httplib::Client cli(origin_);
    cli.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
    cli.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
    cli.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const int64_t start = clock_.now_ms();

    httplib::Result http_result;
    std::atomic<bool> done{false};
    std::thread worker([&] {
        http_result = cli.Post(path_, headers, body.dump(), "application/json");
        done.store(true);
    });

    bool stopped = false;
    while (!done.load()) {
        if (!stopped && abort.fired()) {
            cli.stop();
            stopped = true;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(config_.abort_poll_ms));
    }
    worker.join();

    GenerationResult res;
    res.prompt_tokens = count_prompt_tokens(req);
    res.duration_ms = clock_.now_ms() - start;

    if (stopped) {
        // The request was torn down mid-flight; no usable payload.
        res.aborted = true;
        res.tokens_estimated = true;
        res.completion_tokens = 0;
        return res;
    }

    if (!http_result) {
        auto err = http_result.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write) {
            throw ModelError(ModelErrorKind::Timeout,
                             "model request timed out: " + httplib::to_string(err));
        }
        throw ModelError(ModelErrorKind::Transport,
                         "model request failed: " + httplib::to_string(err));
    }
    if (http_result->status < 200 || http_result->status >= 300) {
        throw ModelError(ModelErrorKind::Transport,
                         "model endpoint returned status " + std::to_string(http_result->status));
    }

    json parsed = json::parse(http_result->body, nullptr, false);
    if (parsed.is_discarded())
        throw ModelError(ModelErrorKind::BadResponse, "model response is not valid JSON");

    try {
        res.content = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ModelError(ModelErrorKind::BadResponse, "model response missing choices[0].message.content");
    }

    if (parsed.contains("usage") && parsed["usage"].is_object()) {
        const json& usage = parsed["usage"];
        res.prompt_tokens = usage.value("prompt_tokens", res.prompt_tokens);
        res.completion_tokens = usage.value("completion_tokens", count_tokens(res.content));
    } else {
        res.completion_tokens = count_tokens(res.content);
        res.tokens_estimated = true;
    }
    return res;
}

}  // namespace specplan
