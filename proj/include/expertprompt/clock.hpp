#pragma once

#include <chrono>
#include <memory>
#include <thread>

namespace expertprompt {

/// Injectable time source so retry backoff and the rate limiter are testable
/// without real waiting.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::steady_clock::time_point now() = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock : public Clock {
public:
    std::chrono::steady_clock::time_point now() override {
        return std::chrono::steady_clock::now();
    }
    void sleep_for(std::chrono::milliseconds d) override { std::this_thread::sleep_for(d); }
};

std::shared_ptr<Clock> system_clock_instance();

}  // namespace expertprompt
