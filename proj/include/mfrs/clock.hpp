#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

namespace mfrs {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

inline std::int64_t to_micros(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_micros(std::int64_t us) { return Timestamp(std::chrono::microseconds(us)); }

/// RFC 3339 UTC, e.g. 2024-03-01T12:00:00Z or 2024-03-01T12:00:00.250000Z.
std::string format_rfc3339(Timestamp t);

/// Injectable time source; every stored timestamp comes from one of these.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override;
};

/// Test clock: returns whatever was last set.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start = from_micros(0)) : us_(to_micros(start)) {}

    Timestamp now() const override { return from_micros(us_.load()); }
    void set(Timestamp t) { us_.store(to_micros(t)); }
    void advance(std::chrono::microseconds d) { us_.fetch_add(d.count()); }

private:
    std::atomic<std::int64_t> us_;
};

}  // namespace mfrs
