#include "agora/coordinator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace agora {

double effective_priority(const Proposal& proposal, Millis now)
{
    const double age_s = static_cast<double>(now - proposal.submitted_at) / 1000.0;
    return std::max(0.0, proposal.priority - proposal.decay_rate * age_s);
}

std::string_view to_string(RejectReason reason) noexcept
{
    switch (reason) {
    case RejectReason::invalid: return "invalid";
    case RejectReason::empty: return "empty";
    case RejectReason::pass: return "pass";
    case RejectReason::too_long: return "too_long";
    case RejectReason::repeat: return "repeat";
    }
    return "invalid";
}

std::optional<RejectReason> filter_chain(const Say& say, const CoordinatorParams& params,
                                         const std::deque<std::string>& recent_agent_texts)
{
    const auto trimmed = trim(say.text);
    if (trimmed.empty()) {
        return RejectReason::empty;
    }
    if (trimmed == params.pass_sentinel) {
        return RejectReason::pass;
    }
    if (say.text.size() > params.max_say_chars) {
        return RejectReason::too_long;
    }
    const auto window = std::min(params.repeat_window, recent_agent_texts.size());
    if (std::find(recent_agent_texts.end() - static_cast<std::ptrdiff_t>(window), recent_agent_texts.end(),
                  say.text) != recent_agent_texts.end()) {
        return RejectReason::repeat;
    }
    return std::nullopt;
}

SubmitResult Coordinator::submit(Proposal proposal)
{
    if (auto violation = proposal_violation(proposal); !violation.empty()) {
        spdlog::error("proposal {} from {} rejected: {}", proposal.id, proposal.source_actor, violation);
        return SubmitResult{false, RejectReason::invalid, violation};
    }
    std::lock_guard lock(mutex_);
    if (const auto* say = std::get_if<Say>(&proposal.action)) {
        if (auto reason = filter_chain(*say, params_, recent_agent_texts_)) {
            spdlog::info("proposal {} from {} filtered out: {}", proposal.id, proposal.source_actor,
                         to_string(*reason));
            return SubmitResult{false, reason, "filtered"};
        }
    }
    pending_.push_back(Entry{std::move(proposal), next_order_++});
    return SubmitResult{true, std::nullopt, {}};
}

bool Coordinator::expired(const Proposal& p, Millis now) const
{
    return static_cast<double>(now - p.submitted_at) >= p.timeout_s * 1000.0;
}

bool Coordinator::cooling_down(Millis now) const
{
    return last_emit_at_ && static_cast<double>(now - *last_emit_at_) < params_.cooldown_s * 1000.0;
}

std::optional<Proposal> Coordinator::tick(Millis now)
{
    std::lock_guard lock(mutex_);

    std::erase_if(pending_, [&](const Entry& e) { return expired(e.proposal, now); });
    // Anti-repetition is re-checked here: another proposal with the same
    // text may have been emitted since this one was accepted.
    std::erase_if(pending_, [&](const Entry& e) {
        const auto* say = std::get_if<Say>(&e.proposal.action);
        return say && filter_chain(*say, params_, recent_agent_texts_) == RejectReason::repeat;
    });

    const Entry* best = nullptr;
    double best_priority = 0.0;
    for (const auto& e : pending_) {
        const double p = effective_priority(e.proposal, now);
        if (p <= params_.emit_floor) {
            continue;
        }
        if (!best || p > best_priority ||
            (p == best_priority &&
             std::tie(e.proposal.submitted_at, e.proposal.source_actor, e.order) <
                 std::tie(best->proposal.submitted_at, best->proposal.source_actor, best->order))) {
            best = &e;
            best_priority = p;
        }
    }
    if (!best) {
        return std::nullopt;
    }
    if (is_say(best->proposal.action) && cooling_down(now)) {
        return std::nullopt;
    }

    Proposal winner = best->proposal;
    std::erase_if(pending_, [&](const Entry& e) {
        return e.proposal.id == winner.id || e.proposal.in_response_to == winner.in_response_to;
    });
    if (const auto* say = std::get_if<Say>(&winner.action)) {
        last_emit_at_ = now;
        recent_agent_texts_.push_back(say->text);
        while (recent_agent_texts_.size() > params_.repeat_window) {
            recent_agent_texts_.pop_front();
        }
    }
    return winner;
}

std::vector<Proposal> Coordinator::pending() const
{
    std::lock_guard lock(mutex_);
    std::vector<Proposal> out;
    out.reserve(pending_.size());
    for (const auto& e : pending_) {
        out.push_back(e.proposal);
    }
    return out;
}

std::size_t Coordinator::pending_size() const
{
    std::lock_guard lock(mutex_);
    return pending_.size();
}

std::optional<Millis> Coordinator::last_emit_at() const
{
    std::lock_guard lock(mutex_);
    return last_emit_at_;
}

} // namespace agora
