#include "agora/history.hpp"
#include "agora/wire.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

using namespace agora;
using agora::testing::TempDir;

namespace {

std::size_t count_lines(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++n;
    }
    return n;
}

NewMessage msg(const std::string& sender, const std::string& text, Millis ts = 0)
{
    return NewMessage{sender, Role::human, text, ts};
}

} // namespace

TEST(HistoryTest, FirstAppendGetsSeqZero)
{
    VirtualClock clock;
    History h(clock, std::nullopt);
    const SessionId s("s1");
    EXPECT_EQ(h.append(s, msg("Ana", "hi")).seq, 0);
    EXPECT_EQ(h.append(s, msg("Ben", "yo")).seq, 1);
    EXPECT_EQ(h.next_seq(s), 2);
}

TEST(HistoryTest, NextSeqOnUnknownSessionThrows)
{
    VirtualClock clock;
    History h(clock, std::nullopt);
    try {
        h.next_seq(SessionId("nope"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_session);
    }
}

TEST(HistoryTest, LastNIsChronologicalSuffix)
{
    VirtualClock clock;
    History h(clock, std::nullopt);
    const SessionId s("s1");
    EXPECT_TRUE(h.last_n(s, 5).empty());
    for (int i = 0; i < 3; ++i) {
        h.append(s, msg("Ana", "m" + std::to_string(i)));
    }
    EXPECT_EQ(h.last_n(s, 5).size(), 3u);
    for (int i = 3; i < 10; ++i) {
        h.append(s, msg("Ana", "m" + std::to_string(i)));
    }
    auto last = h.last_n(s, 5);
    ASSERT_EQ(last.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(last[i].seq, static_cast<std::int64_t>(5 + i));
    }
    // Suffix property over every n.
    const auto all = h.all(s);
    for (std::size_t n = 1; n <= 12; ++n) {
        auto tail = h.last_n(s, n);
        const auto k = std::min(n, all.size());
        ASSERT_EQ(tail.size(), k);
        EXPECT_TRUE(std::equal(tail.begin(), tail.end(), all.end() - static_cast<std::ptrdiff_t>(k)));
    }
}

// Oracle: with N concurrent appenders the assigned seqs are exactly {0..N-1}
// and each stored message sits at the index of its seq.
TEST(HistoryTest, ConcurrentAppendsGetDenseUniqueSeqs)
{
    VirtualClock clock;
    TempDir dir;
    History h(clock, dir.path());
    const SessionId s("busy");
    constexpr int n = 1000;
    std::vector<std::int64_t> seqs(n, -1);
    {
        std::vector<std::thread> threads;
        threads.reserve(n);
        for (int i = 0; i < n; ++i) {
            threads.emplace_back([&, i] { seqs[i] = h.append(s, msg("u" + std::to_string(i), "t")).seq; });
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    std::set<std::int64_t> unique(seqs.begin(), seqs.end());
    ASSERT_EQ(unique.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(*unique.begin(), 0);
    EXPECT_EQ(*unique.rbegin(), n - 1);
    auto all = h.all(s);
    ASSERT_EQ(all.size(), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        EXPECT_EQ(all[seqs[i]].sender, "u" + std::to_string(i));
    }
    // The log is in seq order too.
    auto chat = chat_history(replay_log(*h.log_path(s)));
    EXPECT_EQ(chat, all);
}

TEST(HistoryTest, HundredAppendsRoundTripThroughLog)
{
    VirtualClock clock;
    TempDir dir;
    History h(clock, dir.path());
    const SessionId s("round");
    for (int i = 0; i < 100; ++i) {
        clock.set(i * 10);
        h.append(s, NewMessage{i % 3 ? "Ana" : "Bot", i % 3 ? Role::human : Role::agent,
                               "line \"" + std::to_string(i) + "\"\nsecond", i * 10});
    }
    const auto path = *h.log_path(s);
    EXPECT_EQ(path.filename(), "round.jsonl");
    EXPECT_EQ(count_lines(path), 100u);
    auto records = replay_log(path);
    ASSERT_EQ(records.size(), 100u);
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(records[i].seq, static_cast<std::int64_t>(i));
        EXPECT_EQ(records[i].written_at, static_cast<Millis>(i * 10));
    }
    EXPECT_EQ(chat_history(records), h.all(s));
}

TEST(HistoryTest, StateAndActionsInterleaveInOneLog)
{
    VirtualClock clock;
    TempDir dir;
    History h(clock, dir.path());
    const SessionId s("mix");
    h.append(s, msg("Ana", "hi"));
    auto st = h.log_state(ActivityStateUpdate{s, StateKind::subtask_complete, {{"task", "1"}}, 5});
    auto act = h.log_action(s, Command{"reveal_task", {{"task", "2"}}});
    h.append(s, NewMessage{"Bot", Role::agent, "next", 9});
    EXPECT_EQ(st, 1);
    EXPECT_EQ(act, 2);
    EXPECT_TRUE(h.has_update(s, 1));
    EXPECT_FALSE(h.has_update(s, 0));
    auto records = replay_log(*h.log_path(s));
    ASSERT_EQ(records.size(), 4u);
    EXPECT_TRUE(std::holds_alternative<ChatMessage>(records[0].record));
    EXPECT_TRUE(std::holds_alternative<ActivityStateUpdate>(records[1].record));
    ASSERT_TRUE(std::holds_alternative<OutboundAction>(records[2].record));
    EXPECT_EQ(std::get<OutboundAction>(records[2].record).emitted_seq, 2);
    EXPECT_EQ(std::get<ChatMessage>(records[3].record).seq, 1);

    std::ifstream in(*h.log_path(s));
    std::string first;
    std::getline(in, first);
    auto j = nlohmann::json::parse(first);
    EXPECT_EQ(j.at("kind"), "chat");
    EXPECT_TRUE(j.contains("seq") && j.contains("body") && j.contains("written_at"));
}

TEST(HistoryTest, EmptyLogReplaysToNothing)
{
    TempDir dir;
    const auto p = dir.path() / "empty.jsonl";
    std::ofstream(p).close();
    EXPECT_TRUE(replay_log(p).empty());
}

TEST(HistoryTest, GarbageLineIsReportedByNumber)
{
    VirtualClock clock;
    TempDir dir;
    History h(clock, dir.path());
    const SessionId s("bad");
    h.append(s, msg("Ana", "one"));
    h.append(s, msg("Ana", "two"));
    {
        std::ofstream out(*h.log_path(s), std::ios::app);
        out << "{not json\n";
    }
    h.append(s, msg("Ana", "four"));
    try {
        replay_log(*h.log_path(s));
        FAIL();
    } catch (const CorruptLine& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.code(), Errc::corrupt_line);
    }
}

TEST(HistoryTest, RemovedLogDirKeepsMemoryAndSurfacesFailure)
{
    VirtualClock clock;
    auto dir = std::make_unique<TempDir>();
    const auto path = dir->path();
    History h(clock, path);
    const SessionId s("gone");
    h.append(s, msg("Ana", "before"));
    dir.reset();
    ASSERT_FALSE(std::filesystem::exists(path));
    try {
        h.append(s, msg("Ana", "after"));
        FAIL();
    } catch (const LogWriteFailure& e) {
        ASSERT_TRUE(e.message());
        EXPECT_EQ(e.message()->seq, 1);
        EXPECT_EQ(e.code(), Errc::log_write_failure);
    }
    auto last = h.last_n(s, 5);
    ASSERT_EQ(last.size(), 2u);
    EXPECT_EQ(last[1].text, "after");
}
