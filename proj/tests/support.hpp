#pragma once

// Shared helpers for unit and acceptance tests.

#include "agora/gateway.hpp"
#include "agora/history.hpp"
#include "agora/replay.hpp"
#include "agora/sim.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

namespace agora::testing {

inline std::filesystem::path fixture(const std::string& rel)
{
    return std::filesystem::path(AGORA_FIXTURES) / rel;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The shipped regex lab: both personas, the 8-stage plan, the mock script.
inline replay::Options fixture_options()
{
    replay::Options o;
    o.server = config::load_server_file(fixture("server.conf"));
    o.agents = config::load_agents_dir(fixture("agents"));
    o.plan = config::load_plan_file(fixture("regex8.plan"));
    o.mock_script = read_file(fixture("script.txt"));
    return o;
}

// A scratch directory removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("agora-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

// Records every frame sent to it.
class RecordingConnection final : public Connection {
public:
    void send(std::string frame) override
    {
        std::lock_guard lock(mutex_);
        frames_.push_back(std::move(frame));
    }
    void close() override { closed_ = true; }

    std::vector<std::string> frames() const
    {
        std::lock_guard lock(mutex_);
        return frames_;
    }
    std::vector<nlohmann::json> parsed() const
    {
        std::vector<nlohmann::json> out;
        for (const auto& f : frames()) {
            out.push_back(nlohmann::json::parse(f));
        }
        return out;
    }
    std::vector<nlohmann::json> of_type(const std::string& type) const
    {
        std::vector<nlohmann::json> out;
        for (auto& j : parsed()) {
            if (j.at("type") == type) {
                out.push_back(std::move(j));
            }
        }
        return out;
    }
    bool closed() const noexcept { return closed_; }

private:
    mutable std::mutex mutex_;
    std::vector<std::string> frames_;
    bool closed_ = false;
};

// Single-threaded gateway on a virtual clock with a scripted backend.
struct SimRoom {
    explicit SimRoom(config::ServerConfig server_config = {}, std::vector<AgentConfig> agent_configs = {},
                     std::optional<Plan> plan_config = std::nullopt, std::string script = {},
                     std::optional<std::filesystem::path> log_dir = std::nullopt, Millis latency_ms = 1000)
        : server(std::move(server_config)),
          agents(std::move(agent_configs)),
          plan(std::move(plan_config)),
          loop(clock),
          history(clock, std::move(log_dir)),
          backend(script),
          gateway(
              PipelineServices{clock, history, backend, server, agents, plan ? &*plan : nullptr},
              [](const SessionId&) { return std::make_unique<InlineExecutor>(); },
              [this, latency_ms](Executor&) { return std::make_unique<SimRunner>(loop, latency_ms); })
    {
    }

    std::shared_ptr<RecordingConnection> join(const std::string& session, const std::string& name)
    {
        auto c = std::make_shared<RecordingConnection>();
        gateway.on_frame(c, nlohmann::json{{"type", "join"}, {"session", session}, {"name", name}}.dump());
        return c;
    }
    void chat(const std::shared_ptr<RecordingConnection>& c, const std::string& text)
    {
        gateway.on_frame(c, nlohmann::json{{"type", "chat"}, {"text", text}}.dump());
    }
    void state(const std::shared_ptr<RecordingConnection>& c, const std::string& kind, const Payload& payload)
    {
        gateway.on_frame(c, nlohmann::json{{"type", "state"}, {"kind", kind}, {"payload", payload}}.dump());
    }

    // Runs every tick (and completion) up to and including `until`. Inputs
    // sent between calls land at the current clock time, before that
    // instant's tick.
    void run_until(Millis until)
    {
        for (; next_tick <= until; next_tick += server.coordinator.tick_interval_ms) {
            loop.schedule(next_tick, SimPhase::tick, [this] { gateway.tick_all(); });
        }
        loop.run_until(until);
    }

    // Moves the clock to `t` without running the tick at `t` yet.
    void advance_to(Millis t)
    {
        run_until(t - 1);
        clock.set(t);
    }

    config::ServerConfig server;
    std::vector<AgentConfig> agents;
    std::optional<Plan> plan;
    VirtualClock clock{0};
    SimLoop loop;
    History history;
    MockBackend backend;
    Gateway gateway;
    Millis next_tick = 0;
};

} // namespace agora::testing
