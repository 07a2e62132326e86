#include "agora/gateway.hpp"

#include "agora/error.hpp"
#include "agora/history.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace agora {

Gateway::Gateway(PipelineServices services, ExecutorFactory executors, RunnerFactory runners)
    : services_(services), executors_(std::move(executors)), runners_(std::move(runners))
{
}

Gateway::~Gateway() = default;

std::shared_ptr<Gateway::Room> Gateway::room_for(const SessionId& session, bool create)
{
    std::lock_guard lock(mutex_);
    if (auto it = rooms_.find(session); it != rooms_.end()) {
        return it->second;
    }
    if (!create) {
        return nullptr;
    }
    services_.history.ensure_session(session);
    auto room = std::make_shared<Room>();
    room->session = session;
    room->executor = executors_(session);
    room->runner = runners_(*room->executor);
    Room* raw = room.get();
    room->pipeline = std::make_unique<Pipeline>(
        session, services_, *room->runner,
        [this, raw](const Proposal& winner) { broadcast(raw->session, winner.action); },
        [raw] {
            std::vector<std::string> names;
            names.reserve(raw->members.size());
            for (const auto& m : raw->members) {
                names.push_back(m.name);
            }
            return names;
        });
    rooms_.emplace(session, room);
    spdlog::info("room {} created", session.value());
    return room;
}

std::optional<Gateway::Registration> Gateway::registration(const Connection* conn) const
{
    std::lock_guard lock(mutex_);
    auto it = registry_.find(conn);
    if (it == registry_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Gateway::deliver(Room& room, const wire::OutboundFrame& frame)
{
    const std::string text = wire::encode(frame);
    for (const auto& m : room.members) {
        if (auto c = m.conn.lock()) {
            c->send(text);
        }
    }
}

void Gateway::send_error(const std::shared_ptr<Connection>& conn, Errc code, const std::string& detail)
{
    conn->send(wire::encode(wire::ErrorFrame{std::string(wire_code(code)), detail}));
}

void Gateway::record_state(Room& room, const ActivityStateUpdate& update)
{
    std::int64_t log_seq = 0;
    try {
        log_seq = services_.history.log_state(update);
    } catch (const LogWriteFailure& e) {
        log_seq = e.log_seq();
    }
    room.pipeline->on_state(update, log_seq);
}

ParticipantId Gateway::handle_join(const std::shared_ptr<Connection>& conn, const std::string& session,
                                   const std::string& name)
{
    auto display = trim(name);
    if (display.empty()) {
        throw Error(Errc::bad_name, "name must be non-empty");
    }
    if (!SessionId::is_valid(session)) {
        throw Error(Errc::bad_session, "session id must be 1-64 URL-safe characters");
    }
    SessionId sid(session);
    ParticipantId pid;
    {
        std::lock_guard lock(mutex_);
        if (registry_.contains(conn.get())) {
            throw Error(Errc::duplicate_join, "connection already joined a session");
        }
        pid = ParticipantId("p" + std::to_string(next_participant_++));
        registry_.emplace(conn.get(), Registration{sid, pid, display});
    }
    auto room = room_for(sid, true);
    std::weak_ptr<Connection> weak = conn;
    room->executor->post([this, room, weak, pid, display] {
        const Millis now = services_.clock.now_ms();
        wire::WelcomeFrame welcome{pid.value(), {}};
        for (const auto& m : services_.history.all(room->session)) {
            welcome.history.push_back(wire::chat_frame(m));
        }
        if (auto c = weak.lock()) {
            c->send(wire::encode(welcome));
        }
        room->members.push_back(Member{pid, display, weak});
        deliver(*room, wire::PresenceFrame{wire::PresenceEvent::join, display, now});
        record_state(*room, ActivityStateUpdate{room->session, StateKind::presence_join,
                                                {{"name", display}, {"participant_id", pid.value()}}, now});
    });
    return pid;
}

void Gateway::handle_chat(const std::shared_ptr<Connection>& conn, const std::string& text)
{
    auto reg = registration(conn.get());
    if (!reg) {
        throw Error(Errc::not_joined, "join a session first");
    }
    auto accepted = validate_chat_text(text);
    auto room = room_for(reg->session, false);
    room->executor->post([this, room, reg = *reg, accepted = std::move(accepted)] {
        ChatMessage message;
        try {
            message = services_.history.append(room->session,
                                               NewMessage{reg.name, Role::human, accepted, services_.clock.now_ms()});
        } catch (const LogWriteFailure& e) {
            message = *e.message();
        }
        deliver(*room, wire::chat_frame(message));
        room->pipeline->on_chat(message);
    });
}

void Gateway::handle_state(const std::shared_ptr<Connection>& conn, const std::string& kind, Payload payload)
{
    auto reg = registration(conn.get());
    if (!reg) {
        throw Error(Errc::not_joined, "join a session first");
    }
    auto parsed = parse_state_kind(kind);
    if (!parsed) {
        throw Error(Errc::malformed_update, "unknown state kind \"" + kind + "\"");
    }
    if (*parsed == StateKind::presence_join || *parsed == StateKind::presence_leave) {
        throw Error(Errc::malformed_update, "presence updates are generated by the server");
    }
    ActivityStateUpdate update{reg->session, *parsed, std::move(payload), 0};
    validate(update);
    auto room = room_for(reg->session, false);
    room->executor->post([this, room, update = std::move(update)]() mutable {
        update.ts = services_.clock.now_ms();
        record_state(*room, update);
    });
}

void Gateway::on_frame(const std::shared_ptr<Connection>& conn, std::string_view text)
{
    try {
        auto frame = wire::decode_inbound(text);
        std::visit(
            [&](auto& f) {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, wire::JoinFrame>) {
                    handle_join(conn, f.session, f.name);
                } else if constexpr (std::is_same_v<T, wire::ChatFrameIn>) {
                    handle_chat(conn, f.text);
                } else {
                    handle_state(conn, f.kind, std::move(f.payload));
                }
            },
            frame);
    } catch (const Error& e) {
        send_error(conn, e.code(), e.what());
    }
}

void Gateway::on_disconnect(const std::shared_ptr<Connection>& conn)
{
    std::optional<Registration> reg;
    {
        std::lock_guard lock(mutex_);
        auto it = registry_.find(conn.get());
        if (it == registry_.end()) {
            return;
        }
        reg = it->second;
        registry_.erase(it);
    }
    auto room = room_for(reg->session, false);
    room->executor->post([this, room, reg = *reg] {
        std::erase_if(room->members, [&](const Member& m) { return m.id == reg.id; });
        const Millis now = services_.clock.now_ms();
        deliver(*room, wire::PresenceFrame{wire::PresenceEvent::leave, reg.name, now});
        record_state(*room, ActivityStateUpdate{room->session, StateKind::presence_leave,
                                                {{"name", reg.name}, {"participant_id", reg.id.value()}}, now});
    });
}

void Gateway::tick_all()
{
    std::vector<std::shared_ptr<Room>> rooms;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [_, r] : rooms_) {
            rooms.push_back(r);
        }
    }
    for (auto& room : rooms) {
        room->executor->post([this, room] { room->pipeline->on_tick(services_.clock.now_ms()); });
    }
}

std::optional<OutboundAction> Gateway::broadcast(const SessionId& session, const Action& action)
{
    auto room = room_for(session, false);
    if (!room) {
        spdlog::warn("broadcast to unknown session {} dropped", session.value());
        return std::nullopt;
    }
    const Millis now = services_.clock.now_ms();
    if (const auto* say = std::get_if<Say>(&action)) {
        ChatMessage message;
        try {
            message = services_.history.append(session, NewMessage{say->author, Role::agent, say->text, now});
        } catch (const LogWriteFailure& e) {
            message = *e.message();
        }
        deliver(*room, wire::chat_frame(message));
        return OutboundAction{session, action, message.seq};
    }
    const auto& cmd = std::get<Command>(action);
    std::int64_t seq = 0;
    try {
        seq = services_.history.log_action(session, action);
    } catch (const LogWriteFailure& e) {
        seq = e.log_seq();
    }
    deliver(*room, wire::CommandFrame{cmd.name, cmd.payload, now});
    return OutboundAction{session, action, seq};
}

std::vector<SessionId> Gateway::sessions() const
{
    std::lock_guard lock(mutex_);
    std::vector<SessionId> out;
    for (const auto& [id, _] : rooms_) {
        out.push_back(id);
    }
    return out;
}

bool Gateway::with_pipeline(const SessionId& session, const std::function<void(Pipeline&)>& fn)
{
    auto room = room_for(session, false);
    if (!room) {
        return false;
    }
    room->executor->post([room, fn] { fn(*room->pipeline); });
    return true;
}

} // namespace agora
