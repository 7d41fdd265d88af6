#pragma once

#include <condition_variable>
#include <mutex>

#include "expertprompt/backend.hpp"
#include "expertprompt/rate_limiter.hpp"

namespace expertprompt {

/// Chat-completion HTTP client. Sends the rendered prompt as one user
/// message (plus the template's system message when present) to
/// {endpoint}/chat/completions.
///
/// Transient failures (connect/timeout, 429, 5xx) are retried with
/// exponential backoff; 401/403 raise AuthError immediately; any 200 body
/// that does not parse as a chat completion raises ProtocolError with the
/// raw body attached. The instance enforces its own in-flight bound and
/// per-minute rate limit, so it is safe to call from any number of workers.
class HttpBackend : public ChatBackend {
public:
    HttpBackend(BackendConfig config, std::shared_ptr<Clock> clock);

    CompletionResponse complete(const CompletionRequest& request) override;
    uint64_t calls() const override { return calls_.load(); }
    std::string descriptor() const override;

private:
    struct AttemptResult {
        bool ok = false;
        bool retryable = false;
        std::string text;
        std::string model;
        FinishReason finish_reason = FinishReason::complete;
        std::string failure;
    };

    AttemptResult attempt(const CompletionRequest& request, const std::string& body);

    class InFlightGuard;

    BackendConfig config_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
    std::string base_url_;
    std::string path_prefix_;
    std::string api_key_;

    std::mutex slots_mu_;
    std::condition_variable slots_cv_;
    int slots_in_use_ = 0;

    std::atomic<uint64_t> calls_{0};
};

}  // namespace expertprompt
