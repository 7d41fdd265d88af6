#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "expertprompt/clock.hpp"
#include "expertprompt/templates.hpp"

namespace expertprompt {

enum class FinishReason {
    complete,
    truncated,
    error,
};

std::string to_string(FinishReason r);

struct CompletionRequest {
    RenderedPrompt prompt;
    std::string model;
    double temperature = 0.7;
    int max_output_tokens = 1024;
    /// Pipeline stage name, for logs only. Excluded from cache_key.
    std::string request_tag;
};

struct CompletionResponse {
    std::string text;
    std::string model;
    FinishReason finish_reason = FinishReason::complete;
    double latency_ms = 0.0;
    bool from_cache = false;
    /// Last failure message when finish_reason == error.
    std::string error;
};

enum class BackendKind {
    http_chat,
    mock,
    /// The same deterministic mock under a distinct kind, so judge runs can
    /// be labeled as using the slot-blind judge and keyed separately in the
    /// cache. Spelled "mock-blind" on the command line.
    mock_blind,
};

std::string to_string(BackendKind k);
BackendKind backend_kind_from_string(const std::string& s);

struct BackendConfig {
    BackendKind kind = BackendKind::mock;
    std::string endpoint;       // http_chat only, e.g. https://api.openai.com/v1
    std::string auth_env_var;   // name of the env var holding the API key
    int max_concurrency = 4;
    int retry_max = 3;
    int retry_base_delay_ms = 500;
    int requests_per_minute = 600;
    int request_timeout_ms = 60000;

    void validate() const;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// Returns model text. Transient failures (timeouts, 429, 5xx) are
    /// retried with exponential backoff up to retry_max; on exhaustion the
    /// response carries finish_reason == error and the last failure message.
    /// Auth failures and malformed payloads throw instead.
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;

    /// Counts every completion actually performed by this backend (cache
    /// hits on a wrapper do not reach it).
    virtual uint64_t calls() const = 0;

    /// Endpoint/model/params summary recorded in the run manifest.
    virtual std::string descriptor() const = 0;
};

/// Digest identifying a completion for caching: kind, model, decoding
/// parameters and the full prompt text. request_tag and timing never
/// participate, so identical prompts from different stages share an entry.
std::string cache_key(BackendKind kind, const CompletionRequest& request);

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config,
                                          std::shared_ptr<Clock> clock = nullptr);

}  // namespace expertprompt
