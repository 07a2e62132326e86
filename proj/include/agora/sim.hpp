#pragma once

// Deterministic virtual-time driver used by replay and tests.

#include "agora/clock.hpp"
#include "agora/executor.hpp"
#include "agora/llm.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <tuple>

namespace agora {

// Order of work scheduled for the same instant.
enum class SimPhase { input = 0, completion = 1, tick = 2 };

class SimLoop {
public:
    explicit SimLoop(VirtualClock& clock) : clock_(clock) {}

    void schedule(Millis at, SimPhase phase, std::function<void()> fn);

    // Runs every item with at <= until in (at, phase, schedule order) order,
    // advancing the clock to each item's time, then sets the clock to until.
    void run_until(Millis until);

    bool empty() const noexcept { return queue_.empty(); }
    std::optional<Millis> next_at() const;
    VirtualClock& clock() noexcept { return clock_; }

private:
    using Key = std::tuple<Millis, int, std::uint64_t>;
    VirtualClock& clock_;
    std::map<Key, std::function<void()>> queue_;
    std::uint64_t counter_ = 0;
};

// Runs the backend call immediately (so scripted replies are consumed in
// request order) and delivers the completion `latency_ms` later.
class SimRunner final : public AsyncRunner {
public:
    SimRunner(SimLoop& loop, Millis latency_ms) : loop_(loop), latency_ms_(latency_ms) {}

    void run(std::function<Completion()> work, std::function<void(Completion)> done) override;

private:
    SimLoop& loop_;
    Millis latency_ms_;
};

// Runs work on the calling thread and delivers the completion through an
// executor; used where no event loop exists.
class InlineRunner final : public AsyncRunner {
public:
    explicit InlineRunner(Executor& executor) : executor_(executor) {}

    void run(std::function<Completion()> work, std::function<void(Completion)> done) override
    {
        auto c = work();
        executor_.post([done = std::move(done), c = std::move(c)] { done(c); });
    }

private:
    Executor& executor_;
};

} // namespace agora
