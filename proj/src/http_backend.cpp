#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "expertprompt/http_backend.hpp"

#include <chrono>
#include <cstdlib>

#include "backend_internal.hpp"
#include "expertprompt/errors.hpp"

namespace expertprompt {

using namespace std::chrono;

namespace {

// Split "scheme://host[:port]/prefix" into client base and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    size_t scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must start with http:// or https://: " + endpoint);
    }
    size_t path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, ""};
    }
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {endpoint.substr(0, path_start), prefix};
}

}  // namespace

class HttpBackend::InFlightGuard {
public:
    InFlightGuard(HttpBackend& b) : b_(b) {
        std::unique_lock<std::mutex> lock(b_.slots_mu_);
        b_.slots_cv_.wait(lock, [&] { return b_.slots_in_use_ < b_.config_.max_concurrency; });
        ++b_.slots_in_use_;
    }
    ~InFlightGuard() {
        {
            std::lock_guard<std::mutex> lock(b_.slots_mu_);
            --b_.slots_in_use_;
        }
        b_.slots_cv_.notify_one();
    }

private:
    HttpBackend& b_;
};

HttpBackend::HttpBackend(BackendConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      limiter_(static_cast<size_t>(config_.requests_per_minute), clock_) {
    config_.validate();
    std::tie(base_url_, path_prefix_) = split_endpoint(config_.endpoint);
    if (!config_.auth_env_var.empty()) {
        const char* key = std::getenv(config_.auth_env_var.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + config_.auth_env_var +
                              " is not set (required for http_chat auth)");
        }
        api_key_ = key;
    }
}

std::string HttpBackend::descriptor() const {
    std::string d = "http_chat " + config_.endpoint;
    d += " retries=" + std::to_string(config_.retry_max);
    d += " rpm=" + std::to_string(config_.requests_per_minute);
    d += " concurrency=" + std::to_string(config_.max_concurrency);
    return d;
}

HttpBackend::AttemptResult HttpBackend::attempt(const CompletionRequest& request,
                                                const std::string& body) {
    limiter_.acquire();
    InFlightGuard guard(*this);
    calls_.fetch_add(1);

    httplib::Client client(base_url_);
    client.set_connection_timeout(0, config_.request_timeout_ms * 1000LL);
    client.set_read_timeout(config_.request_timeout_ms / 1000,
                            (config_.request_timeout_ms % 1000) * 1000);
    client.set_write_timeout(config_.request_timeout_ms / 1000,
                             (config_.request_timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, body,
                           "application/json");

    AttemptResult out;
    if (!res) {
        out.retryable = true;
        out.failure = "transport error: " + httplib::to_string(res.error());
        return out;
    }
    if (res->status == 401 || res->status == 403) {
        throw AuthError("backend rejected credentials (HTTP " + std::to_string(res->status) +
                        ")");
    }
    if (res->status == 429 || res->status >= 500) {
        out.retryable = true;
        out.failure = "HTTP " + std::to_string(res->status);
        return out;
    }
    if (res->status != 200) {
        throw ProtocolError("unexpected HTTP status " + std::to_string(res->status), res->body);
    }

    try {
        auto doc = ordered_json::parse(res->body);
        const auto& choice = doc.at("choices").at(0);
        out.text = choice.at("message").at("content").get<std::string>();
        out.model = doc.value("model", request.model);
        std::string reason = choice.value("finish_reason", "stop");
        out.finish_reason =
            reason == "length" ? FinishReason::truncated : FinishReason::complete;
        out.ok = true;
        return out;
    } catch (const ordered_json::exception& e) {
        throw ProtocolError(std::string("malformed chat-completion payload: ") + e.what(),
                            res->body);
    }
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    detail::validate_request(request);

    ordered_json payload;
    payload["model"] = request.model;
    payload["temperature"] = request.temperature;
    payload["max_tokens"] = request.max_output_tokens;
    ordered_json messages = ordered_json::array();
    if (!request.prompt.system_text.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.prompt.system_text}});
    }
    messages.push_back({{"role", "user"}, {"content", request.prompt.text}});
    payload["messages"] = messages;
    std::string body = payload.dump();

    auto start = clock_->now();
    std::string last_failure = "no attempt made";
    for (int tries = 0; tries <= config_.retry_max; ++tries) {
        if (tries > 0) {
            clock_->sleep_for(milliseconds(config_.retry_base_delay_ms * (1LL << (tries - 1))));
        }
        AttemptResult r = attempt(request, body);
        if (r.ok) {
            CompletionResponse resp;
            resp.text = std::move(r.text);
            resp.model = std::move(r.model);
            resp.finish_reason = r.finish_reason;
            resp.latency_ms =
                static_cast<double>(duration_cast<milliseconds>(clock_->now() - start).count());
            return resp;
        }
        last_failure = std::move(r.failure);
    }

    CompletionResponse resp;
    resp.model = request.model;
    resp.finish_reason = FinishReason::error;
    resp.error = last_failure + " (after " + std::to_string(config_.retry_max + 1) + " attempts)";
    resp.latency_ms =
        static_cast<double>(duration_cast<milliseconds>(clock_->now() - start).count());
    return resp;
}

}  // namespace expertprompt
