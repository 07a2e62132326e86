#include "agora/sim.hpp"

namespace agora {

void SimLoop::schedule(Millis at, SimPhase phase, std::function<void()> fn)
{
    queue_.emplace(Key{at, static_cast<int>(phase), counter_++}, std::move(fn));
}

std::optional<Millis> SimLoop::next_at() const
{
    if (queue_.empty()) {
        return std::nullopt;
    }
    return std::get<0>(queue_.begin()->first);
}

void SimLoop::run_until(Millis until)
{
    while (!queue_.empty()) {
        auto it = queue_.begin();
        const Millis at = std::get<0>(it->first);
        if (at > until) {
            break;
        }
        auto fn = std::move(it->second);
        queue_.erase(it);
        if (at > clock_.now_ms()) {
            clock_.set(at);
        }
        fn();
    }
    if (until > clock_.now_ms()) {
        clock_.set(until);
    }
}

void SimRunner::run(std::function<Completion()> work, std::function<void(Completion)> done)
{
    auto completion = work();
    loop_.schedule(loop_.clock().now_ms() + latency_ms_, SimPhase::completion,
                   [done = std::move(done), completion = std::move(completion)] { done(completion); });
}

} // namespace agora
