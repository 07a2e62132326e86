#include "agora/config.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace agora;
using namespace agora::config;
using agora::testing::fixture;

namespace {

std::vector<Issue> issues_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.issues();
    }
    ADD_FAILURE() << "expected ConfigError";
    return {};
}

std::vector<std::string> described(const std::vector<Issue>& issues)
{
    std::vector<std::string> out;
    for (const auto& i : issues) {
        out.push_back(i.describe());
    }
    return out;
}

std::vector<std::string> read_expected(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    return out;
}

} // namespace

TEST(ConfigParseTest, SectionsAndKeys)
{
    auto doc = parse("[llm]\ntemperature = 0.2\ncontext_length = 5\n");
    ASSERT_EQ(doc.sections.size(), 1u);
    const auto* llm = doc.find("llm");
    ASSERT_TRUE(llm);
    EXPECT_EQ(llm->find("temperature")->value, "0.2");
    EXPECT_EQ(llm->find("context_length")->value, "5");
    EXPECT_EQ(llm->find("context_length")->line, 3u);
}

TEST(ConfigParseTest, MultilineBlockIsVerbatim)
{
    auto doc = parse("[persona]\ninstructions = \"\"\"\nYou are an expert programming tutor.\n  Indented # not a comment\n\n"
                     "Last line.\n\"\"\"\nstyle = brief\n");
    EXPECT_EQ(doc.find("persona")->find("instructions")->value,
              "You are an expert programming tutor.\n  Indented # not a comment\n\nLast line.");
    EXPECT_EQ(doc.find("persona")->find("style")->value, "brief");
}

TEST(ConfigParseTest, CommentsAndCaseSensitivity)
{
    auto doc = parse("# top\n[A]\nKey = 1\nkey = 2\n  # indented comment\n[a]\nkey = 3\n");
    EXPECT_EQ(doc.find("A")->find("Key")->value, "1");
    EXPECT_EQ(doc.find("A")->find("key")->value, "2");
    EXPECT_EQ(doc.find("a")->find("key")->value, "3");
}

TEST(ConfigParseTest, KeyBeforeHeader)
{
    EXPECT_EQ(described(issues_of([] { parse("key = v\n"); })),
              std::vector<std::string>{"KeyOutsideSection at line 1 key"});
}

TEST(ConfigParseTest, ErrorsAreAggregated)
{
    auto issues = issues_of([] { parse("[a]\nx = 1\nx = 2\nnonsense\n[a]\n"); });
    EXPECT_EQ(described(issues), (std::vector<std::string>{"DuplicateKey at line 3 [a] x", "BadLine at line 4 [a]",
                                                            "DuplicateSection at line 5 [a]"}));
}

TEST(AgentConfigTest, PersonaFixturesLoad)
{
    auto tutor = load_agent_file(fixture("agents/tutor.agent"));
    EXPECT_EQ(tutor.persona.agent_name, "Tutor");
    EXPECT_NE(tutor.persona.instructions.find("You are an expert programming tutor"), std::string::npos);
    EXPECT_NE(tutor.persona.examples.find("Remember, + means one or more."), std::string::npos);
    EXPECT_DOUBLE_EQ(tutor.llm.temperature, 0.2);
    EXPECT_EQ(tutor.llm.context_length, 5u);
    EXPECT_EQ(tutor.persona.interests, (std::vector<std::string>{"chat", "apt_opportunity"}));

    auto chef = load_agent_file(fixture("agents/chef.agent"));
    EXPECT_NE(chef.persona.instructions.find("encourage active participation from all students"),
              std::string::npos);
    // Unset persona values fall back to defaults.
    EXPECT_DOUBLE_EQ(chef.persona.defaults.timeout_s, 45.0);
    EXPECT_DOUBLE_EQ(chef.persona.defaults.decay_rate, 0.005);
    EXPECT_DOUBLE_EQ(chef.llm.request_timeout_s, 30.0);
    EXPECT_EQ(chef.persona.pass_sentinel, "[PASS]");
}

TEST(AgentConfigTest, MinimalFileGetsDefaults)
{
    auto a = load_agent(parse("[llm]\nprovider_url = http://localhost:1/x\nmodel = m\ntemperature = 0\n"
                              "context_length = 1\n[persona]\nagent_name = A\ninstructions = I\n"));
    EXPECT_DOUBLE_EQ(a.persona.defaults.priority, 0.5);
    EXPECT_DOUBLE_EQ(a.persona.defaults.timeout_s, 45.0);
    EXPECT_DOUBLE_EQ(a.persona.defaults.decay_rate, 0.005);
    EXPECT_EQ(a.persona.interests, std::vector<std::string>{"chat"});
    EXPECT_EQ(a.persona.pass_sentinel, "[PASS]");
    EXPECT_DOUBLE_EQ(a.llm.request_timeout_s, 30.0);
}

TEST(AgentConfigTest, RenderRoundTrip)
{
    for (const char* f : {"agents/tutor.agent", "agents/chef.agent"}) {
        auto a = load_agent_file(fixture(f));
        EXPECT_EQ(load_agent(parse(render_agent(a))), a) << f;
    }
}

TEST(AgentConfigTest, DirectoryLoadIsSortedAndRejectsDuplicates)
{
    auto agents = load_agents_dir(fixture("agents"));
    ASSERT_EQ(agents.size(), 2u);
    EXPECT_EQ(agents[0].persona.agent_name, "Chef");
    EXPECT_EQ(agents[1].persona.agent_name, "Tutor");

    agora::testing::TempDir dir;
    std::filesystem::copy_file(fixture("agents/tutor.agent"), dir.path() / "a.agent");
    std::filesystem::copy_file(fixture("agents/tutor.agent"), dir.path() / "b.agent");
    auto issues = issues_of([&] { load_agents_dir(dir.path()); });
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_EQ(issues[0].kind, IssueKind::duplicate_key);

    EXPECT_EQ(issues_of([] { load_agents_dir("/definitely/not/here"); })[0].kind, IssueKind::unreadable);
}

TEST(PlanConfigTest, RegexPlanHasEightStages)
{
    auto plan = load_plan_file(fixture("regex8.plan"));
    ASSERT_EQ(plan.stages.size(), 8u);
    EXPECT_EQ(std::get<AfterSeconds>(plan.stages[0].trigger).seconds, 0.0);
    for (std::size_t k = 1; k < 8; ++k) {
        const auto& on = std::get<OnEvent>(plan.stages[k].trigger);
        EXPECT_EQ(on.label, "subtask_complete");
        EXPECT_EQ(on.match, (std::pair<std::string, std::string>{"task", std::to_string(k)}));
        ASSERT_EQ(plan.stages[k].commands.size(), 1u);
        EXPECT_EQ(plan.stages[k].commands[0].name, "reveal_task");
        EXPECT_EQ(plan.stages[k].commands[0].payload.at("task"), std::to_string(k + 1));
    }
}

TEST(ServerConfigTest, FixtureLoadsWithRuleFiles)
{
    auto s = load_server_file(fixture("server.conf"));
    EXPECT_EQ(s.coordinator.tick_interval_ms, 250);
    EXPECT_DOUBLE_EQ(s.coordinator.cooldown_s, 3.0);
    EXPECT_DOUBLE_EQ(s.listeners.inactivity_s, 120.0);
    EXPECT_FALSE(s.listeners.greeting_rules.rules.empty());
    EXPECT_EQ(s.actors.size(), 4u);
}

TEST(ServerConfigTest, ActorSectionsOverrideAndDisable)
{
    auto s = load_server(parse("[actor.greeter]\npriority = 0.3\n[actor.hinter]\nenabled = false\n"
                               "[actor.quiz]\nlabel = quiz\ntemplate = Quiz time, {name}!\n"));
    auto find = [&](const std::string& name) {
        return std::find_if(s.actors.begin(), s.actors.end(), [&](const auto& a) { return a.actor == name; });
    };
    ASSERT_NE(find("greeter"), s.actors.end());
    EXPECT_DOUBLE_EQ(find("greeter")->defaults.priority, 0.3);
    EXPECT_EQ(find("greeter")->text, "Welcome, {name}!");
    EXPECT_EQ(find("hinter"), s.actors.end());
    ASSERT_NE(find("quiz"), s.actors.end());
    EXPECT_EQ(find("quiz")->label, "quiz");
}

// Every malformed fixture yields exactly the issues listed next to it.
TEST(MalformedConfigTest, CorpusMatchesExpectedIssues)
{
    std::size_t checked = 0;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(fixture("bad"))) {
        if (e.path().extension() != ".expected") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto expected_path = f;
        expected_path.replace_extension(".expected");
        const auto expected = read_expected(expected_path);
        std::vector<Issue> issues;
        if (f.extension() == ".agent") {
            issues = issues_of([&] { load_agent_file(f); });
        } else if (f.extension() == ".plan") {
            issues = issues_of([&] { load_plan_file(f); });
        } else {
            issues = issues_of([&] { load_server_file(f); });
        }
        EXPECT_EQ(described(issues), expected) << f;
        ++checked;
    }
    EXPECT_EQ(checked, 10u);
}
