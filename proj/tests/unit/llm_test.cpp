#include "agora/config.hpp"
#include "agora/coordinator.hpp"
#include "agora/history.hpp"
#include "agora/llm.hpp"
#include "agora/sim.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace agora;

namespace {

AgentConfig agent(const std::string& name, std::size_t context_length = 5)
{
    AgentConfig a;
    a.llm.provider_url = "http://localhost:1/v1/chat/completions";
    a.llm.model = "m";
    a.llm.context_length = context_length;
    a.persona.agent_name = name;
    a.persona.instructions = "Help the group.";
    return a;
}

// Records the virtual time of every call and the number of calls that
// overlap it, assuming each lasts `latency` ms.
class TimedBackend final : public LlmBackend {
public:
    TimedBackend(const Clock& clock, MockBackend& inner) : clock_(clock), inner_(inner) {}
    Completion complete(const AgentConfig& a, const PromptBundle& b) override
    {
        calls.push_back(clock_.now_ms());
        return inner_.complete(a, b);
    }
    std::vector<Millis> calls;

private:
    const Clock& clock_;
    MockBackend& inner_;
};

AnnotatedEvent chat_event(const SessionId& s, int n)
{
    return AnnotatedEvent{s.value() + "/e" + std::to_string(n), s, "turn", "chat", {}, MessageTrigger{n}, {}, 0};
}

struct AgentRig {
    explicit AgentRig(AgentConfig cfg, std::string script, Millis latency = 1000)
        : loop(clock), history(clock, std::nullopt), mock(script), timed(clock, mock), runner(loop, latency),
          ids(session)
    {
        llm = std::make_shared<LlmAgent>(std::move(cfg), session,
                                         LlmAgent::Services{clock, history, coordinator, timed, runner, ids});
        history.ensure_session(session);
    }

    void human(const std::string& who, const std::string& text)
    {
        history.append(session, NewMessage{who, Role::human, text, clock.now_ms()});
    }

    VirtualClock clock{0};
    SimLoop loop;
    SessionId session{"s"};
    History history;
    MockBackend mock;
    TimedBackend timed;
    SimRunner runner;
    ProposalIds ids;
    Coordinator coordinator;
    std::shared_ptr<LlmAgent> llm;
};

} // namespace

TEST(PromptTest, SystemTextOrderAndFooter)
{
    PersonaParams p;
    p.scenario = "SCENARIO";
    p.instructions = "INSTRUCTIONS";
    p.style = "";
    p.examples = "EXAMPLES";
    EXPECT_EQ(system_text(p), "SCENARIO\n\nINSTRUCTIONS\n\nEXAMPLES\n\nIf you have nothing useful to add to the "
                              "conversation right now, reply with exactly [PASS] and nothing else.");
}

TEST(PromptTest, EmptyHistoryStillHasSystemText)
{
    PersonaParams p;
    p.instructions = "x";
    auto b = build_prompt(p, {});
    EXPECT_TRUE(b.transcript.empty());
    EXPECT_FALSE(b.latest);
    EXPECT_NE(b.system.find("[PASS]"), std::string::npos);
}

TEST(PromptTest, ChefPersonaEncouragesParticipation)
{
    auto chef = config::load_agent_file(agora::testing::fixture("agents/chef.agent"));
    VirtualClock clock;
    History h(clock, std::nullopt);
    SessionId s("s");
    h.append(s, NewMessage{"Ana", Role::human, "I matched the times", 0});
    h.append(s, NewMessage{"Ben", Role::human, "me too", 0});
    auto b = build_prompt(chef.persona, h.last_n(s, chef.llm.context_length));
    EXPECT_NE(b.system.find("encourage active participation from all students"), std::string::npos);
    EXPECT_EQ(b.latest->rendered(), "Ben: me too");
}

TEST(PromptTest, RequestBodyShape)
{
    auto a = agent("Tutor");
    a.llm.temperature = 0.25;
    PromptBundle b{"SYS", {{"Ana", "hi"}, {"Tutor", "hello"}}, TranscriptEntry{"Tutor", "hello"}};
    auto body = chat_request_body(a.llm, b);
    EXPECT_EQ(body.at("model"), "m");
    EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.25);
    ASSERT_EQ(body.at("messages").size(), 3u);
    EXPECT_EQ(body["messages"][0], (nlohmann::json{{"role", "system"}, {"content", "SYS"}}));
    EXPECT_EQ(body["messages"][2], (nlohmann::json{{"role", "user"}, {"content", "Tutor: hello"}}));
}

TEST(CompletionTest, SentinelAndEmptyArePasses)
{
    EXPECT_EQ(classify_completion("[PASS]", "[PASS]").kind, Completion::Kind::pass);
    EXPECT_EQ(classify_completion("  [PASS]\n", "[PASS]").kind, Completion::Kind::pass);
    EXPECT_EQ(classify_completion("", "[PASS]").kind, Completion::Kind::pass);
    auto c = classify_completion("Try [0-9]+", "[PASS]");
    EXPECT_EQ(c.kind, Completion::Kind::text);
    EXPECT_EQ(c.text, "Try [0-9]+");
}

TEST(MockBackendTest, ScriptIsConsumedPerAgent)
{
    MockBackend m("# c\nA | one\nB | bee\nA | !error\nA | [PASS]\n");
    auto a = agent("A");
    auto b = agent("B");
    EXPECT_EQ(m.complete(a, {}).text, "one");
    EXPECT_EQ(m.complete(b, {}).text, "bee");
    auto err = m.complete(a, {});
    EXPECT_EQ(err.kind, Completion::Kind::error);
    EXPECT_EQ(err.status, 500);
    EXPECT_EQ(m.complete(a, {}).kind, Completion::Kind::pass);
    EXPECT_EQ(m.complete(a, {}).kind, Completion::Kind::pass); // exhausted
    EXPECT_EQ(m.requests().size(), 5u);
    EXPECT_THROW(MockBackend("no bar here"), std::invalid_argument);
}

TEST(LlmAgentTest, InterestGate)
{
    auto cfg = agent("Tutor");
    cfg.persona.interests = {"apt_opportunity"};
    AgentRig rig(cfg, "Tutor | hi\n");
    rig.human("Ana", "x");
    rig.llm->on_event(chat_event(rig.session, 0));
    EXPECT_EQ(rig.llm->requests_issued(), 0u);
    auto e = chat_event(rig.session, 1);
    e.label = "apt_opportunity";
    rig.llm->on_event(e);
    EXPECT_EQ(rig.llm->requests_issued(), 1u);
}

// Oracle: the transcript is exactly the last n stored turns at request time.
TEST(LlmAgentTest, ContextWindowIsSuffixOfHistory)
{
    AgentRig rig(agent("Tutor", 5), "Tutor | ok\n");
    for (int i = 0; i < 12; ++i) {
        rig.human(i % 2 ? "Ben" : "Ana", "turn " + std::to_string(i));
    }
    rig.llm->on_event(chat_event(rig.session, 11));
    auto reqs = rig.mock.requests();
    ASSERT_EQ(reqs.size(), 1u);
    const auto all = rig.history.all(rig.session);
    std::vector<TranscriptEntry> expected;
    for (std::size_t i = all.size() - 5; i < all.size(); ++i) {
        expected.push_back({all[i].sender, all[i].text});
    }
    EXPECT_EQ(reqs[0].bundle.transcript, expected);
    EXPECT_EQ(reqs[0].bundle.transcript.front().text, "turn 7");
    EXPECT_EQ(reqs[0].bundle.latest->text, "turn 11");
}

TEST(LlmAgentTest, CoalescesTriggersWhileInFlight)
{
    constexpr Millis latency = 1000;
    AgentRig rig(agent("Tutor", 5), "Tutor | first\nTutor | second\n", latency);
    rig.clock.set(1000);
    rig.human("Ana", "a");
    rig.llm->on_event(chat_event(rig.session, 0));
    rig.clock.set(1050);
    rig.human("Ben", "b");
    rig.llm->on_event(chat_event(rig.session, 1));
    rig.clock.set(1100);
    rig.human("Ana", "c");
    rig.llm->on_event(chat_event(rig.session, 2));
    EXPECT_TRUE(rig.llm->in_flight());
    EXPECT_EQ(rig.llm->requests_issued(), 1u);

    rig.loop.run_until(10'000);
    // Exactly one follow-up for the two coalesced triggers.
    ASSERT_EQ(rig.timed.calls, (std::vector<Millis>{1000, 2000}));
    for (std::size_t i = 1; i < rig.timed.calls.size(); ++i) {
        EXPECT_GE(rig.timed.calls[i] - rig.timed.calls[i - 1], latency);
    }
    auto reqs = rig.mock.requests();
    ASSERT_EQ(reqs.size(), 2u);
    EXPECT_EQ(reqs[0].bundle.transcript.size(), 1u);
    ASSERT_EQ(reqs[1].bundle.transcript.size(), 3u);
    EXPECT_EQ(reqs[1].bundle.transcript[1].text, "b");
    EXPECT_EQ(reqs[1].bundle.transcript[2].text, "c");

    auto pending = rig.coordinator.pending();
    ASSERT_EQ(pending.size(), 2u);
    EXPECT_EQ(pending[0].in_response_to, "s/e0");
    EXPECT_EQ(pending[1].in_response_to, "s/e2");
    EXPECT_EQ(std::get<Say>(pending[1].action), (Say{"Tutor", "second"}));
    EXPECT_EQ(pending[1].submitted_at, 3000);
}

TEST(LlmAgentTest, ProposalUsesPersonaDefaults)
{
    auto cfg = agent("Tutor");
    cfg.persona.defaults = ProposalDefaults{0.8, 12.0, 0.02};
    AgentRig rig(cfg, "Tutor | hello\n");
    rig.human("Ana", "x");
    rig.llm->on_event(chat_event(rig.session, 0));
    rig.loop.run_until(5000);
    auto pending = rig.coordinator.pending();
    ASSERT_EQ(pending.size(), 1u);
    EXPECT_EQ(pending[0].source_actor, "Tutor");
    EXPECT_DOUBLE_EQ(pending[0].priority, 0.8);
    EXPECT_DOUBLE_EQ(pending[0].timeout_s, 12.0);
    EXPECT_DOUBLE_EQ(pending[0].decay_rate, 0.02);
}

TEST(LlmAgentTest, FailuresAndPassesProduceNoProposal)
{
    AgentRig rig(agent("Tutor"), "Tutor | !error\nTutor | [PASS]\n");
    rig.human("Ana", "x");
    rig.llm->on_event(chat_event(rig.session, 0));
    rig.loop.run_until(5000);
    rig.llm->on_event(chat_event(rig.session, 1));
    rig.loop.run_until(10'000);
    EXPECT_EQ(rig.llm->requests_issued(), 2u);
    EXPECT_EQ(rig.llm->proposals_submitted(), 0u);
    EXPECT_EQ(rig.coordinator.pending_size(), 0u);
    EXPECT_FALSE(rig.llm->in_flight());
}
