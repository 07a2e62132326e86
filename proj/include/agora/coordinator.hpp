#pragma once

#include "agora/domain.hpp"

#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace agora {

struct CoordinatorParams {
    Millis tick_interval_ms = 250;
    double cooldown_s = 3.0;
    double emit_floor = 0.05;
    std::string pass_sentinel = "[PASS]";
    std::size_t max_say_chars = 1200;
    // Anti-repetition window over the session's most recent agent messages.
    std::size_t repeat_window = 3;
};

// priority - decay_rate * age_seconds, clamped at zero.
double effective_priority(const Proposal& proposal, Millis now);

enum class RejectReason { invalid, empty, pass, too_long, repeat };

std::string_view to_string(RejectReason reason) noexcept;

// Mechanical content checks for a Say. `recent_agent_texts` holds the
// session's latest agent messages, oldest first.
std::optional<RejectReason> filter_chain(const Say& say, const CoordinatorParams& params,
                                         const std::deque<std::string>& recent_agent_texts);

struct SubmitResult {
    bool accepted = false;
    std::optional<RejectReason> reason;
    std::string detail;

    explicit operator bool() const noexcept { return accepted; }
};

/// Output coordinator for one session. Holds competing proposals and emits
/// at most one per tick. submit() may be called from any thread.
class Coordinator {
public:
    explicit Coordinator(CoordinatorParams params = {}) : params_(std::move(params)) {}

    SubmitResult submit(Proposal proposal);

    // Expires, arbitrates, and returns the winning proposal, if any.
    std::optional<Proposal> tick(Millis now);

    std::vector<Proposal> pending() const;
    std::size_t pending_size() const;
    std::optional<Millis> last_emit_at() const;
    const CoordinatorParams& params() const noexcept { return params_; }

private:
    struct Entry {
        Proposal proposal;
        std::uint64_t order = 0;
    };

    bool expired(const Proposal& p, Millis now) const;
    bool cooling_down(Millis now) const;

    CoordinatorParams params_;
    mutable std::mutex mutex_;
    std::vector<Entry> pending_;
    std::uint64_t next_order_ = 0;
    std::optional<Millis> last_emit_at_;
    std::deque<std::string> recent_agent_texts_;
};

} // namespace agora
