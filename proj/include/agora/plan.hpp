#pragma once

#include "agora/domain.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace agora {

struct AfterSeconds {
    double seconds = 0.0;
    bool operator==(const AfterSeconds&) const = default;
};

struct OnEvent {
    std::string label;
    // Optional payload constraint key=value.
    std::optional<std::pair<std::string, std::string>> match;
    bool operator==(const OnEvent&) const = default;
};

using StageTrigger = std::variant<AfterSeconds, OnEvent>;

struct StageCommand {
    std::string name;
    Payload payload;
    bool operator==(const StageCommand&) const = default;
};

struct Stage {
    std::string id;
    StageTrigger trigger;
    std::optional<std::string> prompt;
    std::vector<StageCommand> commands;

    bool operator==(const Stage&) const = default;
};

struct Plan {
    std::vector<Stage> stages;
    std::string author = "Bot";

    bool operator==(const Plan&) const = default;
};

// Throws Error(invalid_plan) for an empty plan, negative times, or stages
// with neither prompt nor commands.
void validate(const Plan& plan);

inline constexpr double plan_priority = 1.0;
inline constexpr double plan_timeout_s = 300.0;

/// One armed plan for one session. Stages fire strictly in order and at most
/// once; time triggers are measured from the start time.
class PlanRun {
public:
    PlanRun(Plan plan, SessionId session, Millis started_at);

    // Fires every consecutive stage whose time trigger is due.
    std::vector<Proposal> on_tick(Millis now);
    // Fires the current stage if it waits for this event, then any time
    // stages that are already due.
    std::vector<Proposal> on_event(const AnnotatedEvent& event, Millis now);

    std::size_t current_stage() const noexcept { return current_; }
    bool finished() const noexcept { return current_ >= plan_.stages.size(); }
    Millis started_at() const noexcept { return started_at_; }
    const Plan& plan() const noexcept { return plan_; }

private:
    bool due(const Stage& stage, Millis now) const;
    void fire(const Stage& stage, Millis now, std::vector<Proposal>& out);
    void fire_due_time_stages(Millis now, std::vector<Proposal>& out);

    Plan plan_;
    SessionId session_;
    Millis started_at_;
    std::size_t current_ = 0;
};

} // namespace agora
