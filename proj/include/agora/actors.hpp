#pragma once

#include "agora/coordinator.hpp"
#include "agora/domain.hpp"

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace agora {

struct ProposalDefaults {
    double priority = 0.5;
    double timeout_s = 45.0;
    double decay_rate = 0.005;

    bool operator==(const ProposalDefaults&) const = default;
};

// A templated response to one event label. Placeholders are `{key}` and are
// resolved from the event payload.
struct ResponseTemplate {
    std::string actor;
    std::string label;
    std::string text;
    std::string author = "Bot";
    ProposalDefaults defaults;

    bool operator==(const ResponseTemplate&) const = default;
};

// Substitutes every {key}; nullopt when any key is missing from `payload`.
std::optional<std::string> render_template(std::string_view text, const Payload& payload);

// Issues proposal ids "<session>/p<n>", unique within a session.
class ProposalIds {
public:
    explicit ProposalIds(const SessionId& session) : prefix_(session.value() + "/p") {}
    std::string next() { return prefix_ + std::to_string(next_++); }

private:
    std::string prefix_;
    std::uint64_t next_ = 0;
};

struct ActorContext {
    Millis now = 0;
    ProposalIds& ids;
};

class Actor {
public:
    virtual ~Actor() = default;

    virtual std::string_view name() const = 0;
    virtual bool interested_in(std::string_view label) const = 0;
    // At most one proposal per event.
    virtual std::optional<Proposal> propose(const AnnotatedEvent& event, ActorContext& ctx) = 0;
};

class TemplateActor final : public Actor {
public:
    explicit TemplateActor(ResponseTemplate tmpl) : tmpl_(std::move(tmpl)) {}

    std::string_view name() const override { return tmpl_.actor; }
    bool interested_in(std::string_view label) const override { return label == tmpl_.label; }
    std::optional<Proposal> propose(const AnnotatedEvent& event, ActorContext& ctx) override;

    const ResponseTemplate& response() const noexcept { return tmpl_; }

private:
    ResponseTemplate tmpl_;
};

class ActorSet {
public:
    // Throws std::invalid_argument on a duplicate name.
    void add(std::unique_ptr<Actor> actor);

    // Offers the event to every interested actor and submits their proposals.
    // Returns the proposals the coordinator accepted.
    std::vector<Proposal> consume(const AnnotatedEvent& event, ActorContext& ctx, Coordinator& coordinator);

    std::size_t size() const noexcept { return actors_.size(); }

private:
    std::vector<std::unique_ptr<Actor>> actors_;
};

// Greeter, APT prompter, progression announcer and inactivity hinter.
std::vector<ResponseTemplate> default_response_templates();

} // namespace agora
