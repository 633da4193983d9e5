#pragma once

#include "sentinel/clock.hpp"

#include <mutex>

namespace sentinel {

/// Serializes request dispatch with a minimum spacing between requests and
/// honours server-imposed pauses (Retry-After, exhausted rate windows).
class RateLimiter {
public:
    RateLimiter(Clock& clock, Millis min_interval) : clock_(clock), min_interval_(min_interval) {}

    /// Blocks (on the clock) until the next slot, then claims it.
    void acquire();
    /// No request is dispatched before `t`.
    void defer_until(Timestamp t);

    [[nodiscard]] Millis min_interval() const { return min_interval_; }

private:
    Clock& clock_;
    Millis min_interval_;
    std::mutex mu_;
    Timestamp next_slot_ = 0;
};

} // namespace sentinel
