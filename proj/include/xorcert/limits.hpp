#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>

namespace xorcert {

class TimeLimitExceeded : public std::runtime_error {
public:
    TimeLimitExceeded() : std::runtime_error("time limit exceeded") {}
};

class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;
    explicit Deadline(double seconds)
        : at_(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(seconds))) {}

    bool expired() const { return at_ && Clock::now() >= *at_; }
    void check() const {
        if (expired())
            throw TimeLimitExceeded();
    }

private:
    std::optional<Clock::time_point> at_;
};

}  // namespace xorcert
