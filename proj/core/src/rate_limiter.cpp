#include "sentinel/rate_limiter.hpp"

#include <algorithm>

namespace sentinel {

void RateLimiter::acquire() {
    std::lock_guard lock(mu_);
    const Timestamp slot = std::max(clock_.now(), next_slot_);
    clock_.sleep_until(slot);
    next_slot_ = slot + min_interval_.count();
}

void RateLimiter::defer_until(Timestamp t) {
    std::lock_guard lock(mu_);
    next_slot_ = std::max(next_slot_, t);
}

} // namespace sentinel
