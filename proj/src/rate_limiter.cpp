#include "expertprompt/rate_limiter.hpp"

#include "expertprompt/errors.hpp"

namespace expertprompt {

using namespace std::chrono;

std::shared_ptr<Clock> system_clock_instance() {
    static auto instance = std::make_shared<SystemClock>();
    return instance;
}

RateLimiter::RateLimiter(size_t requests_per_minute, std::shared_ptr<Clock> clock)
    : limit_(requests_per_minute), clock_(std::move(clock)) {
    if (limit_ == 0) {
        throw ConfigError("requests_per_minute must be positive");
    }
}

void RateLimiter::acquire() {
    for (;;) {
        milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto now = clock_->now();
            while (!issued_.empty() && now - issued_.front() >= minutes(1)) {
                issued_.pop_front();
            }
            if (issued_.size() < limit_) {
                issued_.push_back(now);
                return;
            }
            wait = duration_cast<milliseconds>(issued_.front() + minutes(1) - now) +
                   milliseconds(1);
        }
        clock_->sleep_for(wait);
    }
}

}  // namespace expertprompt
