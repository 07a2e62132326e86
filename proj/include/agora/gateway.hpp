#pragma once

#include "agora/domain.hpp"
#include "agora/error.hpp"
#include "agora/executor.hpp"
#include "agora/pipeline.hpp"
#include "agora/wire.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace agora {

// One client connection as seen by the gateway. send() must preserve call order.
class Connection {
public:
    virtual ~Connection() = default;
    virtual void send(std::string frame) = 0;
    virtual void close() = 0;
};

/// Transport-independent room logic: joins, chat, state updates and
/// broadcasts. Every mutation of a room runs on that room's executor, so
/// every member of a room observes the same frame order.
class Gateway {
public:
    using ExecutorFactory = std::function<std::unique_ptr<Executor>(const SessionId&)>;
    using RunnerFactory = std::function<std::unique_ptr<AsyncRunner>(Executor&)>;

    Gateway(PipelineServices services, ExecutorFactory executors, RunnerFactory runners);
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    // Decodes one client frame and routes it; protocol errors are answered
    // with an `error` frame to that connection only.
    void on_frame(const std::shared_ptr<Connection>& conn, std::string_view text);
    void on_disconnect(const std::shared_ptr<Connection>& conn);

    // Throw Error on BadName / DuplicateJoin / NotJoined / EmptyMessage /
    // TooLong / MalformedUpdate.
    ParticipantId handle_join(const std::shared_ptr<Connection>& conn, const std::string& session,
                              const std::string& name);
    void handle_chat(const std::shared_ptr<Connection>& conn, const std::string& text);
    void handle_state(const std::shared_ptr<Connection>& conn, const std::string& kind, Payload payload);

    // Posts a tick to every room.
    void tick_all();

    // Emits an action into a room: Say becomes an agent chat message,
    // Command a command frame. Must run on the room's executor (the
    // pipeline's emit path does). Unknown sessions are logged and dropped.
    std::optional<OutboundAction> broadcast(const SessionId& session, const Action& action);

    std::vector<SessionId> sessions() const;
    // Runs `fn` on the session's executor with its pipeline; false if unknown.
    bool with_pipeline(const SessionId& session, const std::function<void(Pipeline&)>& fn);

    History& history() noexcept { return services_.history; }

private:
    struct Member {
        ParticipantId id;
        std::string name;
        std::weak_ptr<Connection> conn;
    };

    struct Room {
        SessionId session;
        std::unique_ptr<Executor> executor;
        std::unique_ptr<AsyncRunner> runner;
        std::unique_ptr<Pipeline> pipeline;
        std::vector<Member> members; // executor-confined
    };

    struct Registration {
        SessionId session;
        ParticipantId id;
        std::string name;
    };

    std::shared_ptr<Room> room_for(const SessionId& session, bool create);
    std::optional<Registration> registration(const Connection* conn) const;
    void deliver(Room& room, const wire::OutboundFrame& frame);
    void send_error(const std::shared_ptr<Connection>& conn, Errc code, const std::string& detail);
    void record_state(Room& room, const ActivityStateUpdate& update);

    PipelineServices services_;
    ExecutorFactory executors_;
    RunnerFactory runners_;

    mutable std::mutex mutex_;
    std::map<SessionId, std::shared_ptr<Room>> rooms_;
    std::unordered_map<const Connection*, Registration> registry_;
    std::atomic<std::uint64_t> next_participant_{1};
};

} // namespace agora
