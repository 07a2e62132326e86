#include "agora/history.hpp"

#include "agora/wire.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>

namespace agora {

namespace {

using wire::json;

std::string_view kind_of(const SessionLogRecord& r)
{
    switch (r.record.index()) {
    case 0: return "chat";
    case 1: return "state";
    default: return "action";
    }
}

} // namespace

std::string encode_log_record(const SessionLogRecord& r)
{
    json body = std::visit([](const auto& v) { return wire::to_json(v); }, r.record);
    json line{{"seq", r.seq}, {"kind", kind_of(r)}, {"body", std::move(body)}, {"written_at", r.written_at}};
    return line.dump();
}

History::History(const Clock& clock, std::optional<std::filesystem::path> log_dir)
    : clock_(clock), log_dir_(std::move(log_dir))
{
}

History::SessionState* History::find(const SessionId& session) const
{
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session);
    return it == sessions_.end() ? nullptr : it->second.get();
}

History::SessionState& History::state(const SessionId& session) const
{
    auto* st = find(session);
    if (!st) {
        throw Error(Errc::unknown_session, "unknown session " + session.value());
    }
    return *st;
}

void History::ensure_session(const SessionId& session)
{
    std::lock_guard lock(sessions_mutex_);
    if (!sessions_.contains(session)) {
        sessions_.emplace(session, std::make_unique<SessionState>());
    }
}

bool History::has_session(const SessionId& session) const
{
    return find(session) != nullptr;
}

std::int64_t History::next_seq(const SessionId& session) const
{
    auto& st = state(session);
    std::lock_guard lock(st.mutex);
    return static_cast<std::int64_t>(st.messages.size());
}

std::optional<std::filesystem::path> History::log_path(const SessionId& session) const
{
    if (!log_dir_) {
        return std::nullopt;
    }
    return *log_dir_ / (session.value() + ".jsonl");
}

std::optional<std::string> History::write_line(const SessionId& session, SessionState& st, SessionLogRecord record)
{
    record.seq = st.next_log_seq++;
    record.written_at = clock_.now_ms();
    auto path = log_path(session);
    if (!path) {
        return std::nullopt;
    }
    // Reopened per record so a vanished directory is detected immediately.
    std::ofstream out(*path, std::ios::app | std::ios::binary);
    if (!out) {
        return "cannot open " + path->string();
    }
    out << encode_log_record(record) << '\n';
    out.flush();
    if (!out) {
        return "write failed for " + path->string();
    }
    return std::nullopt;
}

ChatMessage History::append(const SessionId& session, NewMessage message)
{
    ensure_session(session);
    auto& st = state(session);
    std::lock_guard lock(st.mutex);
    ChatMessage stored{session, static_cast<std::int64_t>(st.messages.size()), std::move(message.sender),
                       message.role, std::move(message.text), message.ts};
    st.messages.push_back(stored);
    const auto log_seq = st.next_log_seq;
    if (auto err = write_line(session, st, SessionLogRecord{0, stored, 0})) {
        spdlog::error("session log for {}: {}", session.value(), *err);
        throw LogWriteFailure(*err, log_seq, stored);
    }
    return stored;
}

std::int64_t History::log_state(const ActivityStateUpdate& update)
{
    ensure_session(update.session);
    auto& st = state(update.session);
    std::lock_guard lock(st.mutex);
    const auto log_seq = st.next_log_seq;
    st.update_log_seqs.push_back(log_seq);
    if (auto err = write_line(update.session, st, SessionLogRecord{0, update, 0})) {
        spdlog::error("session log for {}: {}", update.session.value(), *err);
        throw LogWriteFailure(*err, log_seq, std::nullopt);
    }
    return log_seq;
}

std::int64_t History::log_action(const SessionId& session, const Action& action)
{
    ensure_session(session);
    auto& st = state(session);
    std::lock_guard lock(st.mutex);
    const auto log_seq = st.next_log_seq;
    if (auto err = write_line(session, st, SessionLogRecord{0, OutboundAction{session, action, log_seq}, 0})) {
        spdlog::error("session log for {}: {}", session.value(), *err);
        throw LogWriteFailure(*err, log_seq, std::nullopt);
    }
    return log_seq;
}

std::vector<ChatMessage> History::last_n(const SessionId& session, std::size_t n) const
{
    auto* st = find(session);
    if (!st || n == 0) {
        return {};
    }
    std::lock_guard lock(st->mutex);
    const auto count = std::min(n, st->messages.size());
    return {st->messages.end() - static_cast<std::ptrdiff_t>(count), st->messages.end()};
}

std::vector<ChatMessage> History::all(const SessionId& session) const
{
    auto* st = find(session);
    if (!st) {
        return {};
    }
    std::lock_guard lock(st->mutex);
    return st->messages;
}

std::size_t History::size(const SessionId& session) const
{
    auto* st = find(session);
    if (!st) {
        return 0;
    }
    std::lock_guard lock(st->mutex);
    return st->messages.size();
}

bool History::has_message(const SessionId& session, std::int64_t seq) const
{
    auto* st = find(session);
    if (!st) {
        return false;
    }
    std::lock_guard lock(st->mutex);
    return seq >= 0 && static_cast<std::size_t>(seq) < st->messages.size();
}

bool History::has_update(const SessionId& session, std::int64_t log_seq) const
{
    auto* st = find(session);
    if (!st) {
        return false;
    }
    std::lock_guard lock(st->mutex);
    return std::binary_search(st->update_log_seqs.begin(), st->update_log_seqs.end(), log_seq);
}

std::vector<SessionLogRecord> replay_log(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::corrupt_line, "cannot open " + path.string());
    }
    std::vector<SessionLogRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw CorruptLine(line_no, "not a JSON object");
        }
        try {
            SessionLogRecord r;
            r.seq = j.at("seq").get<std::int64_t>();
            r.written_at = j.at("written_at").get<std::int64_t>();
            const auto kind = j.at("kind").get<std::string>();
            const auto& body = j.at("body");
            if (kind == "chat") {
                r.record = wire::chat_message_from_json(body);
            } else if (kind == "state") {
                r.record = wire::state_update_from_json(body);
            } else if (kind == "action") {
                r.record = wire::outbound_action_from_json(body);
            } else {
                throw CorruptLine(line_no, "unknown kind \"" + kind + "\"");
            }
            if (!records.empty() && r.seq <= records.back().seq) {
                throw CorruptLine(line_no, "record seq out of order");
            }
            records.push_back(std::move(r));
        } catch (const CorruptLine&) {
            throw;
        } catch (const std::exception& e) {
            throw CorruptLine(line_no, e.what());
        }
    }
    return records;
}

std::vector<ChatMessage> chat_history(const std::vector<SessionLogRecord>& records)
{
    std::vector<ChatMessage> out;
    for (const auto& r : records) {
        if (const auto* m = std::get_if<ChatMessage>(&r.record)) {
            out.push_back(*m);
        }
    }
    return out;
}

} // namespace agora
