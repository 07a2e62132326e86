#pragma once

#include "agora/clock.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace agora {

inline constexpr std::size_t max_chat_chars = 4000;
inline constexpr std::size_t max_session_id_chars = 64;

// Identifies one activity session (one room). Non-empty, at most 64
// characters from the URL-safe set [A-Za-z0-9._~-].
class SessionId {
public:
    SessionId() = default;
    explicit SessionId(std::string value);

    const std::string& value() const noexcept { return value_; }
    static bool is_valid(std::string_view candidate) noexcept;

    auto operator<=>(const SessionId&) const = default;

private:
    std::string value_;
};

class ParticipantId {
public:
    ParticipantId() = default;
    explicit ParticipantId(std::string value);

    const std::string& value() const noexcept { return value_; }

    auto operator<=>(const ParticipantId&) const = default;

private:
    std::string value_;
};

enum class Role { human, agent, system };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

using Payload = std::map<std::string, std::string>;

struct ChatMessage {
    SessionId session;
    std::int64_t seq = 0;
    std::string sender;
    Role role = Role::human;
    std::string text;
    Millis ts = 0;

    bool operator==(const ChatMessage&) const = default;
};

enum class StateKind { presence_join, presence_leave, subtask_complete, custom };

std::string_view to_string(StateKind kind) noexcept;
std::optional<StateKind> parse_state_kind(std::string_view text) noexcept;

struct ActivityStateUpdate {
    SessionId session;
    StateKind kind = StateKind::custom;
    Payload payload;
    Millis ts = 0;

    bool operator==(const ActivityStateUpdate&) const = default;
};

// Throws Error(malformed_update) when a subtask_complete lacks "task".
void validate(const ActivityStateUpdate& update);

struct Assessment {
    std::string note;
    double confidence = 1.0;

    bool operator==(const Assessment&) const = default;
};

// What an annotated event was detected on: a chat message (by seq), a logged
// state update (by session-log seq), or a clock tick.
struct MessageTrigger {
    std::int64_t seq = 0;
    bool operator==(const MessageTrigger&) const = default;
};
struct UpdateTrigger {
    std::int64_t log_seq = 0;
    bool operator==(const UpdateTrigger&) const = default;
};
struct TickTrigger {
    Millis at = 0;
    bool operator==(const TickTrigger&) const = default;
};
using Trigger = std::variant<MessageTrigger, UpdateTrigger, TickTrigger>;

struct AnnotatedEvent {
    std::string id;
    SessionId session;
    std::string source_listener;
    std::string label;
    Assessment assessment;
    Trigger trigger;
    // Values available to response templates: name, sender, task, text, ...
    Payload payload;
    Millis created_at = 0;

    bool operator==(const AnnotatedEvent&) const = default;
};

struct Say {
    std::string author;
    std::string text;
    bool operator==(const Say&) const = default;
};

struct Command {
    std::string name;
    Payload payload;
    bool operator==(const Command&) const = default;
};

using Action = std::variant<Say, Command>;

inline bool is_say(const Action& action) noexcept { return std::holds_alternative<Say>(action); }

struct Proposal {
    std::string id;
    SessionId session;
    std::string source_actor;
    Action action;
    double priority = 0.0;
    double timeout_s = 1.0;
    double decay_rate = 0.0;
    Millis submitted_at = 0;
    std::string in_response_to;

    bool operator==(const Proposal&) const = default;
};

// Empty string when the proposal satisfies its invariants, otherwise a reason.
std::string proposal_violation(const Proposal& proposal);

struct OutboundAction {
    SessionId session;
    Action action;
    std::int64_t emitted_seq = 0;

    bool operator==(const OutboundAction&) const = default;
};

// Trims trailing whitespace and enforces 1..4000 characters.
// Throws Error(empty_message) or Error(too_long).
std::string validate_chat_text(std::string_view text);

std::string trim(std::string_view text);

} // namespace agora

template <>
struct std::hash<agora::SessionId> {
    std::size_t operator()(const agora::SessionId& id) const noexcept
    {
        return std::hash<std::string>{}(id.value());
    }
};
