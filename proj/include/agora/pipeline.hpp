#pragma once

#include "agora/actors.hpp"
#include "agora/config.hpp"
#include "agora/coordinator.hpp"
#include "agora/listeners.hpp"
#include "agora/llm.hpp"
#include "agora/plan.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace agora {

class History;

// Shared, read-mostly dependencies of every session pipeline.
struct PipelineServices {
    const Clock& clock;
    History& history;
    LlmBackend& backend;
    const config::ServerConfig& server;
    const std::vector<AgentConfig>& agents;
    const Plan* plan = nullptr;
};

/// Everything that happens inside one session between transport and
/// broadcast: listeners, event queue, actors, LLM agents, the plan, and the
/// output coordinator. Not thread-safe; run it on the session's executor.
class Pipeline {
public:
    using Emit = std::function<void(const Proposal& winner)>;
    using Participants = std::function<std::vector<std::string>()>;

    Pipeline(SessionId session, PipelineServices services, AsyncRunner& runner, Emit emit,
             Participants participants);

    // Inputs already stored/logged by the caller.
    void on_chat(const ChatMessage& message);
    void on_state(const ActivityStateUpdate& update, std::int64_t log_seq);
    void on_tick(Millis now);

    Coordinator& coordinator() noexcept { return coordinator_; }
    const EventQueue& queue() const noexcept { return queue_; }
    const std::optional<PlanRun>& plan() const noexcept { return plan_; }
    const std::vector<std::shared_ptr<LlmAgent>>& agents() const noexcept { return agents_; }

    // Every event that passed through the queue, in dequeue order.
    const std::vector<AnnotatedEvent>& event_log() const noexcept { return event_log_; }

private:
    void dispatch(const ListenerInput& input, Millis now);
    void drain(Millis now);
    void submit_all(std::vector<Proposal> proposals);

    SessionId session_;
    PipelineServices services_;
    Emit emit_;
    Participants participants_;

    EventIds event_ids_;
    ProposalIds proposal_ids_;
    ListenerSet listeners_;
    EventQueue queue_;
    ActorSet actors_;
    Coordinator coordinator_;
    std::optional<PlanRun> plan_;
    std::vector<std::shared_ptr<LlmAgent>> agents_;
    std::vector<AnnotatedEvent> event_log_;
};

} // namespace agora
