#include "agora/error.hpp"
#include "agora/wire.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace agora;
using namespace agora::wire;

namespace {

Errc decode_error(std::string_view text)
{
    try {
        decode_inbound(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decoded: " << text;
    return Errc::bad_frame;
}

class FrameGen {
public:
    explicit FrameGen(std::uint32_t seed) : rng_(seed) {}

    std::string text()
    {
        static const std::vector<std::string> pieces{"a", "Z", "0", " ", "\"", "\\", "\n", "{", "}", "é", "漢",
                                                     "🙂", "ts", "type", ":", ","};
        std::string out;
        for (int n = pick(0, 12); n > 0; --n) {
            out += pieces[pick(0, static_cast<int>(pieces.size()) - 1)];
        }
        return out;
    }
    Payload payload()
    {
        Payload p;
        for (int n = pick(0, 4); n > 0; --n) {
            p[text()] = text();
        }
        return p;
    }
    ChatFrame chat()
    {
        return ChatFrame{text(), static_cast<Role>(pick(0, 2)), pick(0, 1'000'000), text(), pick(0, 1'000'000'000)};
    }
    InboundFrame inbound()
    {
        switch (pick(0, 2)) {
        case 0: return JoinFrame{text(), text()};
        case 1: return ChatFrameIn{text()};
        default: return StateFrame{text(), payload()};
        }
    }
    OutboundFrame outbound()
    {
        switch (pick(0, 4)) {
        case 0: {
            WelcomeFrame w{text(), {}};
            for (int n = pick(0, 3); n > 0; --n) {
                w.history.push_back(chat());
            }
            return w;
        }
        case 1: return chat();
        case 2: return PresenceFrame{pick(0, 1) ? PresenceEvent::join : PresenceEvent::leave, text(), pick(0, 99999)};
        case 3: return CommandFrame{text(), payload(), pick(0, 99999)};
        default: return ErrorFrame{text(), text()};
        }
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::mt19937 rng_;
};

} // namespace

TEST(WireTest, DecodesClientFrames)
{
    EXPECT_EQ(std::get<JoinFrame>(decode_inbound(R"({"type":"join","session":"s1","name":"Ana"})")),
              (JoinFrame{"s1", "Ana"}));
    EXPECT_EQ(std::get<ChatFrameIn>(decode_inbound(R"({"type":"chat","text":"hi"})")), ChatFrameIn{"hi"});
    auto st = std::get<StateFrame>(decode_inbound(R"({"type":"state","kind":"subtask_complete","payload":{"task":"3"}})"));
    EXPECT_EQ(st.kind, "subtask_complete");
    EXPECT_EQ(st.payload.at("task"), "3");
}

TEST(WireTest, ScalarPayloadValuesBecomeStrings)
{
    auto st = std::get<StateFrame>(decode_inbound(R"({"type":"state","kind":"custom","payload":{"task":3,"ok":true}})"));
    EXPECT_EQ(st.payload.at("task"), "3");
    EXPECT_EQ(st.payload.at("ok"), "true");
}

TEST(WireTest, RejectsMalformedFrames)
{
    EXPECT_EQ(decode_error("not json"), Errc::bad_frame);
    EXPECT_EQ(decode_error("[1,2]"), Errc::bad_frame);
    EXPECT_EQ(decode_error(R"({"type":"join","session":"s1"})"), Errc::bad_frame);
    EXPECT_EQ(decode_error(R"({"type":"chat","text":5})"), Errc::bad_frame);
    EXPECT_EQ(decode_error(R"({"type":"state","kind":"custom","payload":{"a":{"b":1}}})"), Errc::bad_frame);
    EXPECT_EQ(decode_error(R"({"type":"dance"})"), Errc::unknown_type);
    EXPECT_EQ(decode_error(R"({"text":"hi"})"), Errc::bad_frame);
}

TEST(WireTest, OutboundShapes)
{
    auto j = json::parse(encode(ChatFrame{"Bot", Role::agent, 4, "hello", 1000}));
    EXPECT_EQ(j, (json{{"type", "chat"}, {"sender", "Bot"}, {"role", "agent"}, {"seq", 4}, {"text", "hello"},
                       {"ts", 1000}}));
    j = json::parse(encode(ErrorFrame{"EMPTY_MESSAGE", "message is empty"}));
    EXPECT_EQ(j, (json{{"type", "error"}, {"code", "EMPTY_MESSAGE"}, {"detail", "message is empty"}}));
    j = json::parse(encode(PresenceFrame{PresenceEvent::leave, "Ana", 7}));
    EXPECT_EQ(j, (json{{"type", "presence"}, {"event", "leave"}, {"name", "Ana"}, {"ts", 7}}));
}

// Property: every frame survives encode/decode unchanged.
TEST(WireTest, RandomFramesRoundTrip)
{
    FrameGen gen(20240917);
    for (int i = 0; i < 2000; ++i) {
        auto in = gen.inbound();
        EXPECT_EQ(decode_inbound(to_json(in).dump()), in);
        auto out = gen.outbound();
        EXPECT_EQ(decode_outbound(json::parse(encode(out))), out);
    }
}

TEST(WireTest, LogValuesRoundTrip)
{
    ChatMessage m{SessionId("s1"), 3, "Ana", Role::human, "hello \"there\"", 42};
    EXPECT_EQ(chat_message_from_json(to_json(m)), m);
    ActivityStateUpdate u{SessionId("s1"), StateKind::subtask_complete, {{"task", "2"}}, 99};
    EXPECT_EQ(state_update_from_json(to_json(u)), u);
    Action say = Say{"Bot", "hi"};
    Action cmd = Command{"reveal_task", {{"task", "4"}}};
    EXPECT_EQ(action_from_json(to_json(say)), say);
    EXPECT_EQ(action_from_json(to_json(cmd)), cmd);
    OutboundAction oa{SessionId("s1"), cmd, 12};
    EXPECT_EQ(outbound_action_from_json(to_json(oa)), oa);
}
