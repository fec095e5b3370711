#pragma once

#include <string>

#include "specplan/model_client.hpp"

namespace specplan {

struct HttpClientConfig {
    // Full endpoint URL, e.g. "http://host:8000/v1/chat/completions".
    std::string endpoint;
    std::string api_key;  // optional; sent as a bearer token, never logged
    std::string model_name = "default";
    int64_t timeout_ms = 120000;
    int64_t abort_poll_ms = 2;
};

// Chat-completions-style HTTP client. Requests carry the model name, the
// message list, temperature and top_p; responses are expected to provide
// choices[0].message.content and, when available, a usage object whose
// token counts take precedence over local approximations. Abort terminates
// the in-flight request at the transport level.
class HttpModelClient final : public ModelClient {
public:
    using ModelClient::generate;
    HttpModelClient(Clock& clock, HttpClientConfig config);

    // Reads MODEL_ENDPOINT and MODEL_API_KEY; throws ModelError(Config) if
    // the endpoint is unset.
    static HttpModelClient from_env(Clock& clock);

    GenerationResult generate(const GenerationRequest& req, const AbortSignal& abort) override;

private:
    Clock& clock_;
    HttpClientConfig config_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;
};

}  // namespace specplan
