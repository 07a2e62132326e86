#include "agora/wire.hpp"

#include "agora/error.hpp"

namespace agora::wire {

namespace {

[[noreturn]] void bad_frame(const std::string& detail)
{
    throw Error(Errc::bad_frame, detail);
}

const json& field(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) {
        bad_frame(std::string("missing field \"") + key + "\"");
    }
    return *it;
}

std::string string_field(const json& j, const char* key)
{
    const auto& v = field(j, key);
    if (!v.is_string()) {
        bad_frame(std::string("field \"") + key + "\" must be a string");
    }
    return v.get<std::string>();
}

std::int64_t int_field(const json& j, const char* key)
{
    const auto& v = field(j, key);
    if (!v.is_number_integer()) {
        bad_frame(std::string("field \"") + key + "\" must be an integer");
    }
    return v.get<std::int64_t>();
}

Role role_field(const json& j)
{
    auto role = parse_role(string_field(j, "role"));
    if (!role) {
        bad_frame("unknown role");
    }
    return *role;
}

json chat_to_json(const ChatFrame& f)
{
    return json{{"type", "chat"},
                {"sender", f.sender},
                {"role", to_string(f.role)},
                {"seq", f.seq},
                {"text", f.text},
                {"ts", f.ts}};
}

ChatFrame chat_from_json(const json& j)
{
    return ChatFrame{string_field(j, "sender"), role_field(j), int_field(j, "seq"),
                     string_field(j, "text"), int_field(j, "ts")};
}

} // namespace

ChatFrame chat_frame(const ChatMessage& message)
{
    return ChatFrame{message.sender, message.role, message.seq, message.text, message.ts};
}

json to_json(const Payload& payload)
{
    json j = json::object();
    for (const auto& [k, v] : payload) {
        j[k] = v;
    }
    return j;
}

Payload payload_from_json(const json& j)
{
    if (!j.is_object()) {
        bad_frame("payload must be an object");
    }
    Payload payload;
    for (const auto& [k, v] : j.items()) {
        if (v.is_string()) {
            payload[k] = v.get<std::string>();
        } else if (v.is_number() || v.is_boolean()) {
            payload[k] = v.dump();
        } else {
            bad_frame("payload values must be scalars");
        }
    }
    return payload;
}

InboundFrame decode_inbound(std::string_view text)
{
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        bad_frame("frame is not a JSON object");
    }
    const std::string type = string_field(j, "type");
    if (type == "join") {
        return JoinFrame{string_field(j, "session"), string_field(j, "name")};
    }
    if (type == "chat") {
        return ChatFrameIn{string_field(j, "text")};
    }
    if (type == "state") {
        Payload payload;
        if (auto it = j.find("payload"); it != j.end()) {
            payload = payload_from_json(*it);
        }
        return StateFrame{string_field(j, "kind"), std::move(payload)};
    }
    throw Error(Errc::unknown_type, "unknown frame type \"" + type + "\"");
}

json to_json(const InboundFrame& frame)
{
    return std::visit(
        [](const auto& f) -> json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, JoinFrame>) {
                return json{{"type", "join"}, {"session", f.session}, {"name", f.name}};
            } else if constexpr (std::is_same_v<T, ChatFrameIn>) {
                return json{{"type", "chat"}, {"text", f.text}};
            } else {
                return json{{"type", "state"}, {"kind", f.kind}, {"payload", to_json(f.payload)}};
            }
        },
        frame);
}

json to_json(const OutboundFrame& frame)
{
    return std::visit(
        [](const auto& f) -> json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, WelcomeFrame>) {
                json history = json::array();
                for (const auto& c : f.history) {
                    history.push_back(chat_to_json(c));
                }
                return json{{"type", "welcome"}, {"participant_id", f.participant_id}, {"history", history}};
            } else if constexpr (std::is_same_v<T, ChatFrame>) {
                return chat_to_json(f);
            } else if constexpr (std::is_same_v<T, PresenceFrame>) {
                return json{{"type", "presence"},
                            {"event", f.event == PresenceEvent::join ? "join" : "leave"},
                            {"name", f.name},
                            {"ts", f.ts}};
            } else if constexpr (std::is_same_v<T, CommandFrame>) {
                return json{{"type", "command"}, {"name", f.name}, {"payload", to_json(f.payload)}, {"ts", f.ts}};
            } else {
                return json{{"type", "error"}, {"code", f.code}, {"detail", f.detail}};
            }
        },
        frame);
}

std::string encode(const OutboundFrame& frame)
{
    return to_json(frame).dump();
}

OutboundFrame decode_outbound(const json& j)
{
    if (!j.is_object()) {
        bad_frame("frame is not a JSON object");
    }
    const std::string type = string_field(j, "type");
    if (type == "welcome") {
        WelcomeFrame w{string_field(j, "participant_id"), {}};
        const auto& history = field(j, "history");
        if (!history.is_array()) {
            bad_frame("history must be an array");
        }
        for (const auto& c : history) {
            w.history.push_back(chat_from_json(c));
        }
        return w;
    }
    if (type == "chat") {
        return chat_from_json(j);
    }
    if (type == "presence") {
        const std::string event = string_field(j, "event");
        if (event != "join" && event != "leave") {
            bad_frame("presence event must be join or leave");
        }
        return PresenceFrame{event == "join" ? PresenceEvent::join : PresenceEvent::leave,
                             string_field(j, "name"), int_field(j, "ts")};
    }
    if (type == "command") {
        return CommandFrame{string_field(j, "name"), payload_from_json(field(j, "payload")), int_field(j, "ts")};
    }
    if (type == "error") {
        return ErrorFrame{string_field(j, "code"), string_field(j, "detail")};
    }
    throw Error(Errc::unknown_type, "unknown frame type \"" + type + "\"");
}

json to_json(const ChatMessage& m)
{
    return json{{"session", m.session.value()},
                {"seq", m.seq},
                {"sender", m.sender},
                {"role", to_string(m.role)},
                {"text", m.text},
                {"ts", m.ts}};
}

ChatMessage chat_message_from_json(const json& j)
{
    return ChatMessage{SessionId(string_field(j, "session")), int_field(j, "seq"), string_field(j, "sender"),
                       role_field(j), string_field(j, "text"), int_field(j, "ts")};
}

json to_json(const ActivityStateUpdate& u)
{
    return json{{"session", u.session.value()},
                {"kind", to_string(u.kind)},
                {"payload", to_json(u.payload)},
                {"ts", u.ts}};
}

ActivityStateUpdate state_update_from_json(const json& j)
{
    auto kind = parse_state_kind(string_field(j, "kind"));
    if (!kind) {
        bad_frame("unknown state kind");
    }
    return ActivityStateUpdate{SessionId(string_field(j, "session")), *kind,
                               payload_from_json(field(j, "payload")), int_field(j, "ts")};
}

json to_json(const Action& action)
{
    if (const auto* say = std::get_if<Say>(&action)) {
        return json{{"type", "say"}, {"author", say->author}, {"text", say->text}};
    }
    const auto& cmd = std::get<Command>(action);
    return json{{"type", "command"}, {"name", cmd.name}, {"payload", to_json(cmd.payload)}};
}

Action action_from_json(const json& j)
{
    const std::string type = string_field(j, "type");
    if (type == "say") {
        return Say{string_field(j, "author"), string_field(j, "text")};
    }
    if (type == "command") {
        return Command{string_field(j, "name"), payload_from_json(field(j, "payload"))};
    }
    bad_frame("unknown action type \"" + type + "\"");
}

json to_json(const OutboundAction& a)
{
    return json{{"session", a.session.value()}, {"action", to_json(a.action)}, {"emitted_seq", a.emitted_seq}};
}

OutboundAction outbound_action_from_json(const json& j)
{
    return OutboundAction{SessionId(string_field(j, "session")), action_from_json(field(j, "action")),
                          int_field(j, "emitted_seq")};
}

} // namespace agora::wire
