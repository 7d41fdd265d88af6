#include "expertprompt/backend.hpp"

#include "backend_internal.hpp"
#include "expertprompt/errors.hpp"
#include "expertprompt/hash.hpp"
#include "expertprompt/http_backend.hpp"
#include "expertprompt/mock_backend.hpp"

namespace expertprompt {

namespace detail {

std::string cache_payload(BackendKind kind, const CompletionRequest& request) {
    ordered_json payload;
    payload["kind"] = to_string(kind);
    payload["model"] = request.model;
    payload["temperature"] = request.temperature;
    payload["max_output_tokens"] = request.max_output_tokens;
    payload["prompt"] = request.prompt.prompt_text();
    return payload.dump();
}

void validate_request(const CompletionRequest& request) {
    if (request.temperature < 0.0 || request.temperature > 2.0) {
        throw ConfigError("temperature must lie in [0, 2]");
    }
    if (request.max_output_tokens < 1) {
        throw ConfigError("max_output_tokens must be positive");
    }
}

}  // namespace detail

std::string to_string(FinishReason r) {
    switch (r) {
        case FinishReason::complete:
            return "complete";
        case FinishReason::truncated:
            return "truncated";
        case FinishReason::error:
            return "error";
    }
    return "error";
}

std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::http_chat:
            return "http_chat";
        case BackendKind::mock:
            return "mock";
        case BackendKind::mock_blind:
            return "mock-blind";
    }
    return "mock";
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "http_chat" || s == "http") return BackendKind::http_chat;
    if (s == "mock") return BackendKind::mock;
    if (s == "mock-blind" || s == "mock_blind") return BackendKind::mock_blind;
    throw ConfigError("unknown backend kind: '" + s + "'");
}

void BackendConfig::validate() const {
    if (max_concurrency < 1) {
        throw ConfigError("max_concurrency must be >= 1");
    }
    if (retry_max < 0) {
        throw ConfigError("retry_max must be >= 0");
    }
    if (retry_base_delay_ms < 1) {
        throw ConfigError("retry_base_delay_ms must be positive");
    }
    if (requests_per_minute < 1) {
        throw ConfigError("requests_per_minute must be positive");
    }
    if (request_timeout_ms < 1) {
        throw ConfigError("request_timeout_ms must be positive");
    }
    if (kind == BackendKind::http_chat && endpoint.empty()) {
        throw ConfigError("http_chat backend requires an endpoint URL");
    }
}

std::string cache_key(BackendKind kind, const CompletionRequest& request) {
    return content_hash(detail::cache_payload(kind, request));
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config,
                                          std::shared_ptr<Clock> clock) {
    config.validate();
    switch (config.kind) {
        case BackendKind::mock:
        case BackendKind::mock_blind:
            return std::make_unique<MockBackend>(config.kind);
        case BackendKind::http_chat:
            return std::make_unique<HttpBackend>(config,
                                                 clock ? std::move(clock)
                                                       : system_clock_instance());
    }
    throw ConfigError("unknown backend kind");
}

}  // namespace expertprompt
