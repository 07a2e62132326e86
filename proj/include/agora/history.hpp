#pragma once

#include "agora/clock.hpp"
#include "agora/domain.hpp"
#include "agora/error.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace agora {

// A chat message before the store assigns its seq.
struct NewMessage {
    std::string sender;
    Role role = Role::human;
    std::string text;
    Millis ts = 0;
};

// One line of `<log-dir>/<session>.jsonl`. `seq` numbers records within the
// file (0, 1, 2, ...); chat records additionally carry the chat seq in body.
struct SessionLogRecord {
    std::int64_t seq = 0;
    std::variant<ChatMessage, ActivityStateUpdate, OutboundAction> record;
    Millis written_at = 0;

    bool operator==(const SessionLogRecord&) const = default;
};

std::string encode_log_record(const SessionLogRecord& record);

// Raised by History when the in-memory update succeeded but the log line
// could not be written. `message()` is the stored chat message, if the
// record was one; `log_seq()` is the record seq that was assigned.
class LogWriteFailure : public Error {
public:
    LogWriteFailure(const std::string& detail, std::int64_t log_seq, std::optional<ChatMessage> stored)
        : Error(Errc::log_write_failure, detail), log_seq_(log_seq), stored_(std::move(stored)) {}

    std::int64_t log_seq() const noexcept { return log_seq_; }
    const std::optional<ChatMessage>& message() const noexcept { return stored_; }

private:
    std::int64_t log_seq_;
    std::optional<ChatMessage> stored_;
};

// Raised by replay_log; `line()` is 1-based.
class CorruptLine : public Error {
public:
    CorruptLine(std::size_t line, const std::string& detail)
        : Error(Errc::corrupt_line, "line " + std::to_string(line) + ": " + detail), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Per-session chat history with dense seq assignment and an append-only
/// JSON Lines session log. Thread-safe; each session has its own writer lock.
class History {
public:
    History(const Clock& clock, std::optional<std::filesystem::path> log_dir);

    History(const History&) = delete;
    History& operator=(const History&) = delete;

    void ensure_session(const SessionId& session);
    bool has_session(const SessionId& session) const;

    // Seq the next append will receive. Throws Error(unknown_session).
    std::int64_t next_seq(const SessionId& session) const;

    ChatMessage append(const SessionId& session, NewMessage message);

    // Log a state update or an emitted command; returns the log record seq.
    std::int64_t log_state(const ActivityStateUpdate& update);
    std::int64_t log_action(const SessionId& session, const Action& action);

    // Most recent min(n, stored) messages in chronological order.
    std::vector<ChatMessage> last_n(const SessionId& session, std::size_t n) const;
    std::vector<ChatMessage> all(const SessionId& session) const;
    std::size_t size(const SessionId& session) const;

    bool has_message(const SessionId& session, std::int64_t seq) const;
    bool has_update(const SessionId& session, std::int64_t log_seq) const;

    std::optional<std::filesystem::path> log_path(const SessionId& session) const;

private:
    struct SessionState {
        mutable std::mutex mutex;
        std::vector<ChatMessage> messages;
        std::vector<std::int64_t> update_log_seqs;
        std::int64_t next_log_seq = 0;
    };

    SessionState& state(const SessionId& session) const;
    SessionState* find(const SessionId& session) const;
    // Caller holds the session lock. Returns an error description on failure.
    std::optional<std::string> write_line(const SessionId& session, SessionState& st, SessionLogRecord record);

    const Clock& clock_;
    std::optional<std::filesystem::path> log_dir_;
    mutable std::mutex sessions_mutex_;
    std::unordered_map<SessionId, std::unique_ptr<SessionState>> sessions_;
};

// Parses a session log, stopping at the first malformed line (CorruptLine).
std::vector<SessionLogRecord> replay_log(const std::filesystem::path& path);

// Chat messages from a replayed log, in order.
std::vector<ChatMessage> chat_history(const std::vector<SessionLogRecord>& records);

} // namespace agora
