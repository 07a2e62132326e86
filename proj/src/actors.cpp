#include "agora/actors.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

namespace agora {

std::optional<std::string> render_template(std::string_view text, const Payload& payload)
{
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        const auto close = text.find('}', open + 1);
        if (close == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        out.append(text.substr(pos, open - pos));
        const std::string key(text.substr(open + 1, close - open - 1));
        auto it = payload.find(key);
        if (it == payload.end()) {
            return std::nullopt;
        }
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

std::optional<Proposal> TemplateActor::propose(const AnnotatedEvent& event, ActorContext& ctx)
{
    auto text = render_template(tmpl_.text, event.payload);
    if (!text) {
        spdlog::debug("actor {}: template unresolved for event {}", tmpl_.actor, event.id);
        return std::nullopt;
    }
    return Proposal{ctx.ids.next(),
                    event.session,
                    tmpl_.actor,
                    Say{tmpl_.author, std::move(*text)},
                    tmpl_.defaults.priority,
                    tmpl_.defaults.timeout_s,
                    tmpl_.defaults.decay_rate,
                    ctx.now,
                    event.id};
}

void ActorSet::add(std::unique_ptr<Actor> actor)
{
    for (const auto& a : actors_) {
        if (a->name() == actor->name()) {
            throw std::invalid_argument("duplicate actor name: " + std::string(actor->name()));
        }
    }
    actors_.push_back(std::move(actor));
}

std::vector<Proposal> ActorSet::consume(const AnnotatedEvent& event, ActorContext& ctx, Coordinator& coordinator)
{
    std::vector<Proposal> accepted;
    for (auto& actor : actors_) {
        if (!actor->interested_in(event.label)) {
            continue;
        }
        std::optional<Proposal> proposal;
        try {
            proposal = actor->propose(event, ctx);
        } catch (const std::exception& e) {
            spdlog::error("actor {} failed on event {}: {}", actor->name(), event.id, e.what());
            continue;
        }
        if (!proposal) {
            continue;
        }
        proposal->submitted_at = ctx.now;
        proposal->in_response_to = event.id;
        if (coordinator.submit(*proposal)) {
            accepted.push_back(std::move(*proposal));
        }
    }
    return accepted;
}

std::vector<ResponseTemplate> default_response_templates()
{
    return {
        {"greeter", "presence_join", "Welcome, {name}!", "Bot", {0.4, 20.0, 0.01}},
        {"apt", "apt_opportunity", "{sender}, can you say more about why that works?", "Bot", {0.6, 45.0, 0.005}},
        {"progression", "subtask_complete", "Nice work finishing task {task}! Keep going.", "Bot", {0.9, 60.0, 0.0}},
        {"hinter", "inactivity",
         "Feeling stuck? Hint {period}: try splitting the pattern into smaller pieces and test each piece on one line first.",
         "Bot", {0.7, 60.0, 0.005}},
    };
}

} // namespace agora
