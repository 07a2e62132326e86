#include "agora/plan.hpp"

#include "agora/error.hpp"

#include <cmath>

namespace agora {

void validate(const Plan& plan)
{
    if (plan.stages.empty()) {
        throw Error(Errc::invalid_plan, "plan has no stages");
    }
    for (const auto& stage : plan.stages) {
        if (const auto* after = std::get_if<AfterSeconds>(&stage.trigger);
            after && !(after->seconds >= 0.0 && std::isfinite(after->seconds))) {
            throw Error(Errc::invalid_plan, "stage " + stage.id + ": negative trigger time");
        }
        if (const auto* on = std::get_if<OnEvent>(&stage.trigger); on && on->label.empty()) {
            throw Error(Errc::invalid_plan, "stage " + stage.id + ": empty event label");
        }
        if (!stage.prompt && stage.commands.empty()) {
            throw Error(Errc::invalid_plan, "stage " + stage.id + ": needs a prompt or a command");
        }
    }
}

PlanRun::PlanRun(Plan plan, SessionId session, Millis started_at)
    : plan_(std::move(plan)), session_(std::move(session)), started_at_(started_at)
{
    validate(plan_);
}

bool PlanRun::due(const Stage& stage, Millis now) const
{
    const auto* after = std::get_if<AfterSeconds>(&stage.trigger);
    return after && static_cast<double>(now - started_at_) >= after->seconds * 1000.0;
}

void PlanRun::fire(const Stage& stage, Millis now, std::vector<Proposal>& out)
{
    // Each emission answers its own synthetic event id so that the
    // coordinator's per-event winner-take-all never drops a sibling.
    const std::string base = session_.value() + "/stage." + stage.id;
    if (stage.prompt) {
        out.push_back(Proposal{base + "/prompt", session_, "plan", Say{plan_.author, *stage.prompt}, plan_priority,
                               plan_timeout_s, 0.0, now, base + "/prompt"});
    }
    for (std::size_t i = 0; i < stage.commands.size(); ++i) {
        const auto& cmd = stage.commands[i];
        const std::string id = base + "/command." + std::to_string(i);
        out.push_back(Proposal{id, session_, "plan", Command{cmd.name, cmd.payload}, plan_priority, plan_timeout_s,
                               0.0, now, id});
    }
    ++current_;
}

void PlanRun::fire_due_time_stages(Millis now, std::vector<Proposal>& out)
{
    while (!finished() && due(plan_.stages[current_], now)) {
        fire(plan_.stages[current_], now, out);
    }
}

std::vector<Proposal> PlanRun::on_tick(Millis now)
{
    std::vector<Proposal> out;
    fire_due_time_stages(now, out);
    return out;
}

std::vector<Proposal> PlanRun::on_event(const AnnotatedEvent& event, Millis now)
{
    std::vector<Proposal> out;
    if (finished()) {
        return out;
    }
    const auto& stage = plan_.stages[current_];
    const auto* on = std::get_if<OnEvent>(&stage.trigger);
    if (!on || on->label != event.label) {
        return out;
    }
    if (on->match) {
        auto it = event.payload.find(on->match->first);
        if (it == event.payload.end() || it->second != on->match->second) {
            return out;
        }
    }
    fire(stage, now, out);
    fire_due_time_stages(now, out);
    return out;
}

} // namespace agora
