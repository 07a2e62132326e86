#pragma once

#include "agora/domain.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace agora {

class History;

struct ClockTick {
    SessionId session;
    Millis now = 0;
};

// A state update as seen by listeners: the update plus its session-log seq.
struct StateInput {
    ActivityStateUpdate update;
    std::int64_t log_seq = 0;
};

using ListenerInput = std::variant<ChatMessage, StateInput, ClockTick>;

enum class Interest : unsigned { chat = 1u, state = 2u, tick = 4u };

constexpr unsigned operator|(Interest a, Interest b) noexcept
{
    return static_cast<unsigned>(a) | static_cast<unsigned>(b);
}

Interest interest_of(const ListenerInput& input) noexcept;

// Issues event ids "<session>/e<n>", unique within a session.
class EventIds {
public:
    explicit EventIds(const SessionId& session) : prefix_(session.value() + "/e") {}
    std::string next() { return prefix_ + std::to_string(next_++); }

private:
    std::string prefix_;
    std::uint64_t next_ = 0;
};

// What a listener may read about its session while handling an input.
struct ListenerContext {
    SessionId session;
    Millis now = 0;
    EventIds& ids;
    // Display names of the participants currently in the room.
    std::vector<std::string> participants;

    // Creates an event with a fresh id, stamped with `now`.
    AnnotatedEvent make_event(std::string_view listener, std::string label, Trigger trigger,
                              Payload payload = {}, Assessment assessment = {}) const;
};

class Listener {
public:
    virtual ~Listener() = default;

    virtual std::string_view name() const = 0;
    // Bitwise-or of Interest values.
    virtual unsigned interest() const = 0;
    virtual std::vector<AnnotatedEvent> on_input(const ListenerInput& input, ListenerContext& ctx) = 0;
};

/// FIFO of annotated events for one session. Overflow drops the oldest event.
class EventQueue {
public:
    static constexpr std::size_t default_capacity = 256;

    explicit EventQueue(std::size_t capacity = default_capacity) : capacity_(capacity) {}

    void push(AnnotatedEvent event);
    std::optional<AnnotatedEvent> pop();

    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    std::size_t capacity() const noexcept { return capacity_; }
    std::uint64_t dropped() const noexcept { return dropped_; }

private:
    std::size_t capacity_;
    std::deque<AnnotatedEvent> events_;
    std::uint64_t dropped_ = 0;
};

class ListenerSet {
public:
    // Throws std::invalid_argument on a duplicate name.
    void add(std::unique_ptr<Listener> listener);

    // Runs every interested listener in registration order and enqueues the
    // events they return. A throwing listener is logged and skipped.
    std::vector<AnnotatedEvent> dispatch(const ListenerInput& input, ListenerContext& ctx, EventQueue& queue);

    std::size_t size() const noexcept { return listeners_.size(); }

private:
    std::vector<std::unique_ptr<Listener>> listeners_;
};

// ----------------------------------------------------------------------------
// Rule tables: one rule per line, `label<TAB>pattern`. Blank lines and lines
// starting with '#' are ignored. Patterns are ECMAScript regular expressions
// matched case-insensitively; the token {peer} expands to an alternation of
// the other participants' names (and never matches when there are none).

struct Rule {
    std::string label;
    std::string pattern;
    std::size_t line = 0;
};

struct RuleTable {
    std::vector<Rule> rules;
};

// Throws std::invalid_argument naming the offending line.
RuleTable parse_rule_table(std::string_view text);
RuleTable load_rule_table(const std::string& path);

RuleTable default_greeting_rules();
RuleTable default_apt_rules();

// ----------------------------------------------------------------------------
// Built-in listeners.

// Emits "presence_join" / "presence_leave" for presence state updates.
class PresenceListener final : public Listener {
public:
    std::string_view name() const override { return "presence"; }
    unsigned interest() const override { return static_cast<unsigned>(Interest::state); }
    std::vector<AnnotatedEvent> on_input(const ListenerInput& input, ListenerContext& ctx) override;
};

// Emits "subtask_complete" for subtask completion updates.
class SubtaskListener final : public Listener {
public:
    std::string_view name() const override { return "subtask"; }
    unsigned interest() const override { return static_cast<unsigned>(Interest::state); }
    std::vector<AnnotatedEvent> on_input(const ListenerInput& input, ListenerContext& ctx) override;
};

// Emits "chat" for every human chat turn; the default gate for LLM agents.
class TurnListener final : public Listener {
public:
    std::string_view name() const override { return "turn"; }
    unsigned interest() const override { return static_cast<unsigned>(Interest::chat); }
    std::vector<AnnotatedEvent> on_input(const ListenerInput& input, ListenerContext& ctx) override;
};

// Applies a rule table to human chat turns; at most one event per label per message.
class RuleListener final : public Listener {
public:
    RuleListener(std::string name, RuleTable table);

    std::string_view name() const override { return name_; }
    unsigned interest() const override { return static_cast<unsigned>(Interest::chat); }
    std::vector<AnnotatedEvent> on_input(const ListenerInput& input, ListenerContext& ctx) override;

private:
    struct Compiled {
        Rule rule;
        bool uses_peer = false;
        std::regex regex; // only when !uses_peer
    };

    std::string name_;
    std::vector<Compiled> rules_;
};

/// Emits "inactivity" once per silence period: when no human chat has been
/// seen for at least `threshold_ms`. A human message re-arms it. The silence
/// clock starts when the listener first sees its session.
class InactivityListener final : public Listener {
public:
    explicit InactivityListener(Millis threshold_ms = 120'000) : threshold_ms_(threshold_ms) {}

    std::string_view name() const override { return "inactivity"; }
    unsigned interest() const override { return Interest::chat | Interest::tick; }
    std::vector<AnnotatedEvent> on_input(const ListenerInput& input, ListenerContext& ctx) override;

    // Starts the silence clock (no-op once started).
    void start(Millis now);
    std::optional<AnnotatedEvent> tick(ListenerContext& ctx);

    Millis threshold_ms() const noexcept { return threshold_ms_; }

private:
    Millis threshold_ms_;
    std::optional<Millis> last_human_at_;
    std::optional<std::int64_t> last_human_seq_;
    bool armed_ = true;
    std::uint64_t periods_ = 0; // silence periods reported so far
};

} // namespace agora
