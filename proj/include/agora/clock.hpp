#pragma once

#include <atomic>
#include <cstdint>

namespace agora {

// Milliseconds since the epoch (wall clock) or since simulation start (virtual).
using Millis = std::int64_t;

class Clock {
public:
    virtual ~Clock() = default;
    virtual Millis now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
    Millis now_ms() const override;
};

// Manually driven clock for deterministic tests and replay.
class VirtualClock final : public Clock {
public:
    explicit VirtualClock(Millis start = 0) : now_(start) {}

    Millis now_ms() const override { return now_.load(std::memory_order_acquire); }
    void set(Millis t) { now_.store(t, std::memory_order_release); }
    void advance(Millis dt) { now_.fetch_add(dt, std::memory_order_acq_rel); }

private:
    std::atomic<Millis> now_;
};

} // namespace agora
