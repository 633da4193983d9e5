#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>

namespace sentinel {

/// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;
using Millis = std::chrono::milliseconds;

class Clock {
public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual Timestamp now() const = 0;
    virtual void sleep_until(Timestamp t) = 0;

    void sleep_for(Millis d) { sleep_until(now() + d.count()); }
};

class SystemClock final : public Clock {
public:
    [[nodiscard]] Timestamp now() const override;
    void sleep_until(Timestamp t) override;
};

/// Simulated time. Sleeping advances the clock instead of blocking, so
/// rate limits and backoff schedules run instantly in tests.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start = 1'600'000'000'000) : now_(start) {}

    [[nodiscard]] Timestamp now() const override;
    void sleep_until(Timestamp t) override;

    void advance(Millis d);
    void set(Timestamp t);

private:
    mutable std::mutex mu_;
    Timestamp now_;
};

/// ISO-8601 UTC rendering, second precision.
std::string format_timestamp(Timestamp t);

} // namespace sentinel
