#include "sentinel/clock.hpp"

#include <ctime>
#include <thread>

namespace sentinel {

Timestamp SystemClock::now() const {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_until(Timestamp t) {
    const Timestamp delta = t - now();
    if (delta > 0) std::this_thread::sleep_for(Millis(delta));
}

Timestamp ManualClock::now() const {
    std::lock_guard lock(mu_);
    return now_;
}

void ManualClock::sleep_until(Timestamp t) {
    std::lock_guard lock(mu_);
    if (t > now_) now_ = t;
}

void ManualClock::advance(Millis d) {
    std::lock_guard lock(mu_);
    now_ += d.count();
}

void ManualClock::set(Timestamp t) {
    std::lock_guard lock(mu_);
    now_ = t;
}

std::string format_timestamp(Timestamp t) {
    const std::time_t secs = static_cast<std::time_t>(t / 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace sentinel
