#include "agora/domain.hpp"

#include "agora/error.hpp"

#include <algorithm>
#include <cmath>

namespace agora {

namespace {

bool url_safe(char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '_' || c == '.' || c == '~';
}

bool is_space(char c) noexcept
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_length(std::string_view text) noexcept
{
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

} // namespace

SessionId::SessionId(std::string value) : value_(std::move(value))
{
    if (!is_valid(value_)) {
        throw Error(Errc::bad_session, "session id must be 1-64 URL-safe characters");
    }
}

bool SessionId::is_valid(std::string_view candidate) noexcept
{
    return !candidate.empty() && candidate.size() <= max_session_id_chars &&
           std::all_of(candidate.begin(), candidate.end(), url_safe);
}

ParticipantId::ParticipantId(std::string value) : value_(std::move(value))
{
    if (value_.empty()) {
        throw Error(Errc::bad_frame, "participant id must be non-empty");
    }
}

std::string_view to_string(Role role) noexcept
{
    switch (role) {
    case Role::human: return "human";
    case Role::agent: return "agent";
    case Role::system: return "system";
    }
    return "human";
}

std::optional<Role> parse_role(std::string_view text) noexcept
{
    if (text == "human") return Role::human;
    if (text == "agent") return Role::agent;
    if (text == "system") return Role::system;
    return std::nullopt;
}

std::string_view to_string(StateKind kind) noexcept
{
    switch (kind) {
    case StateKind::presence_join: return "presence_join";
    case StateKind::presence_leave: return "presence_leave";
    case StateKind::subtask_complete: return "subtask_complete";
    case StateKind::custom: return "custom";
    }
    return "custom";
}

std::optional<StateKind> parse_state_kind(std::string_view text) noexcept
{
    if (text == "presence_join") return StateKind::presence_join;
    if (text == "presence_leave") return StateKind::presence_leave;
    if (text == "subtask_complete") return StateKind::subtask_complete;
    if (text == "custom") return StateKind::custom;
    return std::nullopt;
}

void validate(const ActivityStateUpdate& update)
{
    if (update.kind == StateKind::subtask_complete && !update.payload.contains("task")) {
        throw Error(Errc::malformed_update, "subtask_complete requires payload key \"task\"");
    }
}

std::string proposal_violation(const Proposal& proposal)
{
    if (!(proposal.priority >= 0.0 && proposal.priority <= 1.0)) {
        return "priority outside [0,1]";
    }
    if (!(proposal.timeout_s > 0.0) || !std::isfinite(proposal.timeout_s)) {
        return "timeout_s must be > 0";
    }
    if (!(proposal.decay_rate >= 0.0) || !std::isfinite(proposal.decay_rate)) {
        return "decay_rate must be >= 0";
    }
    if (const auto* say = std::get_if<Say>(&proposal.action); say && say->text.empty()) {
        return "Say text must be non-empty";
    }
    return {};
}

std::string trim(std::string_view text)
{
    auto first = std::find_if_not(text.begin(), text.end(), is_space);
    auto last = std::find_if_not(text.rbegin(), text.rend(), is_space).base();
    return first < last ? std::string(first, last) : std::string{};
}

std::string validate_chat_text(std::string_view text)
{
    auto end = std::find_if_not(text.rbegin(), text.rend(), is_space).base();
    std::string accepted(text.begin(), end);
    if (trim(accepted).empty()) {
        throw Error(Errc::empty_message, "message is empty");
    }
    if (utf8_length(accepted) > max_chat_chars) {
        throw Error(Errc::too_long, "message exceeds 4000 characters");
    }
    return accepted;
}

} // namespace agora
