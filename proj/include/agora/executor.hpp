#pragma once

#include <functional>

namespace agora {

// Serial execution context. Work posted to one executor never runs
// concurrently with other work on the same executor, and runs in post order.
class Executor {
public:
    virtual ~Executor() = default;
    virtual void post(std::function<void()> work) = 0;
};

// Runs work immediately on the calling thread (single-threaded simulation).
class InlineExecutor final : public Executor {
public:
    void post(std::function<void()> work) override { work(); }
};

} // namespace agora
