#pragma once

// JSON text frames exchanged over the WebSocket endpoint, plus the JSON
// shapes of domain values used by the session log.

#include "agora/domain.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace agora::wire {

using json = nlohmann::json;

// client -> server
struct JoinFrame {
    std::string session;
    std::string name;
    bool operator==(const JoinFrame&) const = default;
};
struct ChatFrameIn {
    std::string text;
    bool operator==(const ChatFrameIn&) const = default;
};
struct StateFrame {
    std::string kind;
    Payload payload;
    bool operator==(const StateFrame&) const = default;
};
using InboundFrame = std::variant<JoinFrame, ChatFrameIn, StateFrame>;

// server -> client
struct ChatFrame {
    std::string sender;
    Role role = Role::human;
    std::int64_t seq = 0;
    std::string text;
    Millis ts = 0;
    bool operator==(const ChatFrame&) const = default;
};
struct WelcomeFrame {
    std::string participant_id;
    std::vector<ChatFrame> history;
    bool operator==(const WelcomeFrame&) const = default;
};
enum class PresenceEvent { join, leave };
struct PresenceFrame {
    PresenceEvent event = PresenceEvent::join;
    std::string name;
    Millis ts = 0;
    bool operator==(const PresenceFrame&) const = default;
};
struct CommandFrame {
    std::string name;
    Payload payload;
    Millis ts = 0;
    bool operator==(const CommandFrame&) const = default;
};
struct ErrorFrame {
    std::string code;
    std::string detail;
    bool operator==(const ErrorFrame&) const = default;
};
using OutboundFrame = std::variant<WelcomeFrame, ChatFrame, PresenceFrame, CommandFrame, ErrorFrame>;

ChatFrame chat_frame(const ChatMessage& message);

// Throws Error(bad_frame) for malformed JSON or fields, Error(unknown_type)
// for an unrecognised "type".
InboundFrame decode_inbound(std::string_view text);
json to_json(const InboundFrame& frame);

json to_json(const OutboundFrame& frame);
std::string encode(const OutboundFrame& frame);
OutboundFrame decode_outbound(const json& j);

// Domain values as stored in the session log.
json to_json(const Payload& payload);
Payload payload_from_json(const json& j);
json to_json(const ChatMessage& message);
ChatMessage chat_message_from_json(const json& j);
json to_json(const ActivityStateUpdate& update);
ActivityStateUpdate state_update_from_json(const json& j);
json to_json(const Action& action);
Action action_from_json(const json& j);
json to_json(const OutboundAction& action);
OutboundAction outbound_action_from_json(const json& j);

} // namespace agora::wire
