#pragma once

#include <chrono>
#include <deque>
#include <memory>
#include <mutex>

#include "expertprompt/clock.hpp"

namespace expertprompt {

/// Sliding-window limiter: at most `requests_per_minute` acquisitions inside
/// any 60-second window. acquire() blocks (via the injected clock) until a
/// slot frees up. Safe for concurrent callers.
class RateLimiter {
public:
    RateLimiter(size_t requests_per_minute, std::shared_ptr<Clock> clock);

    void acquire();

private:
    size_t limit_;
    std::shared_ptr<Clock> clock_;
    std::mutex mu_;
    std::deque<std::chrono::steady_clock::time_point> issued_;
};

}  // namespace expertprompt
