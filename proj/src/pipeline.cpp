#include "agora/pipeline.hpp"

#include "agora/history.hpp"

#include <spdlog/spdlog.h>

namespace agora {

Pipeline::Pipeline(SessionId session, PipelineServices services, AsyncRunner& runner, Emit emit,
                   Participants participants)
    : session_(std::move(session)),
      services_(services),
      emit_(std::move(emit)),
      participants_(std::move(participants)),
      event_ids_(session_),
      proposal_ids_(session_),
      coordinator_(services.server.coordinator)
{
    const auto& lp = services_.server.listeners;
    const Millis now = services_.clock.now_ms();

    listeners_.add(std::make_unique<PresenceListener>());
    listeners_.add(std::make_unique<SubtaskListener>());
    listeners_.add(std::make_unique<TurnListener>());
    listeners_.add(std::make_unique<RuleListener>("greeting", lp.greeting_rules));
    listeners_.add(std::make_unique<RuleListener>("apt", lp.apt_rules));
    auto inactivity = std::make_unique<InactivityListener>(static_cast<Millis>(lp.inactivity_s * 1000.0));
    inactivity->start(now);
    listeners_.add(std::move(inactivity));

    for (const auto& t : services_.server.actors) {
        actors_.add(std::make_unique<TemplateActor>(t));
    }

    for (const auto& agent : services_.agents) {
        agents_.push_back(std::make_shared<LlmAgent>(
            agent, session_,
            LlmAgent::Services{services_.clock, services_.history, coordinator_, services_.backend, runner,
                               proposal_ids_}));
    }

    if (services_.plan) {
        plan_.emplace(*services_.plan, session_, now);
    }
}

void Pipeline::submit_all(std::vector<Proposal> proposals)
{
    for (auto& p : proposals) {
        coordinator_.submit(std::move(p));
    }
}

void Pipeline::dispatch(const ListenerInput& input, Millis now)
{
    ListenerContext ctx{session_, now, event_ids_, participants_ ? participants_() : std::vector<std::string>{}};
    listeners_.dispatch(input, ctx, queue_);
    drain(now);
}

void Pipeline::drain(Millis now)
{
    ActorContext actx{now, proposal_ids_};
    while (auto event = queue_.pop()) {
        event_log_.push_back(*event);
        actors_.consume(*event, actx, coordinator_);
        if (plan_) {
            submit_all(plan_->on_event(*event, now));
        }
        for (auto& agent : agents_) {
            agent->on_event(*event);
        }
    }
}

void Pipeline::on_chat(const ChatMessage& message)
{
    dispatch(message, services_.clock.now_ms());
}

void Pipeline::on_state(const ActivityStateUpdate& update, std::int64_t log_seq)
{
    dispatch(StateInput{update, log_seq}, services_.clock.now_ms());
}

void Pipeline::on_tick(Millis now)
{
    dispatch(ClockTick{session_, now}, now);
    if (plan_) {
        submit_all(plan_->on_tick(now));
    }
    if (auto winner = coordinator_.tick(now)) {
        emit_(*winner);
    }
}

} // namespace agora
