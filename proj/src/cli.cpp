#include "agora/cli.hpp"

#include "agora/config.hpp"
#include "agora/history.hpp"
#include "agora/http_backend.hpp"
#include "agora/replay.hpp"
#include "agora/server.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <thread>

namespace agora::cli {

namespace {

struct CommonFlags {
    std::string agents;
    std::string plan;
    std::string config;
    std::string mock_llm;
};

struct Loaded {
    config::ServerConfig server;
    std::vector<AgentConfig> agents;
    std::optional<Plan> plan;
};

// Throws config::ConfigError (all problems of one file) or std::runtime_error.
Loaded load(const CommonFlags& f)
{
    Loaded l;
    if (!f.config.empty()) {
        l.server = config::load_server_file(f.config);
    }
    if (!f.agents.empty()) {
        l.agents = config::load_agents_dir(f.agents);
    }
    if (!f.plan.empty()) {
        l.plan = config::load_plan_file(f.plan);
    }
    return l;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int serve(const CommonFlags& flags, int port, const std::string& log_dir, std::ostream& out, std::ostream& err)
{
    Loaded l;
    std::unique_ptr<LlmBackend> backend;
    try {
        l = load(flags);
        if (!flags.mock_llm.empty()) {
            backend = std::make_unique<MockBackend>(read_file(flags.mock_llm));
        } else {
            backend = std::make_unique<HttpBackend>();
        }
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return exit_config;
    }

    SystemClock clock;
    History history(clock, std::filesystem::path(log_dir));
    PipelineServices services{clock, history, *backend, l.server, l.agents, l.plan ? &*l.plan : nullptr};

    std::unique_ptr<net::Server> server;
    try {
        net::ServerOptions opts;
        opts.port = static_cast<unsigned short>(port);
        opts.io_threads = std::max(2u, std::thread::hardware_concurrency());
        server = std::make_unique<net::Server>(services, opts);
    } catch (const net::BindError& e) {
        err << e.what() << "\n";
        return exit_bind;
    }

    std::string names;
    for (const auto& a : l.agents) {
        names += (names.empty() ? "" : ", ") + a.persona.agent_name;
    }
    out << "listening on port " << server->port() << std::endl;
    out << "agents: " << (names.empty() ? "(none)" : names) << std::endl;
    out << "plan: " << (l.plan ? std::to_string(l.plan->stages.size()) + " stages" : std::string("none"))
        << std::endl;
    out << "backend: " << (flags.mock_llm.empty() ? "http" : "mock") << std::endl;
    spdlog::info("serving on port {}", server->port());

    server->run();
    return exit_ok;
}

struct ReplayFlags {
    std::string transcript;
    std::string golden;
    std::string out_path;
    bool update = false;
    long long latency_ms = 1000;
    long long drain_ms = 60'000;
};

int replay(const CommonFlags& flags, const ReplayFlags& r, std::ostream& out, std::ostream& err)
{
    replay::Options opts;
    std::vector<replay::TranscriptLine> transcript;
    try {
        auto l = load(flags);
        opts.server = std::move(l.server);
        opts.agents = std::move(l.agents);
        opts.plan = std::move(l.plan);
        opts.mock_script = read_file(flags.mock_llm);
        transcript = replay::parse_transcript_file(r.transcript);
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return exit_config;
    }
    spdlog::set_level(spdlog::level::warn);
    opts.mock_latency_ms = r.latency_ms;
    opts.drain_ms = r.drain_ms;

    auto result = replay::run(transcript, opts);

    if (!r.out_path.empty()) {
        std::ofstream o(r.out_path, std::ios::binary | std::ios::trunc);
        for (const auto& line : result.captured) {
            o << line << "\n";
        }
    }
    if (r.golden.empty()) {
        for (const auto& line : result.captured) {
            out << line << "\n";
        }
        return exit_ok;
    }
    if (r.update) {
        std::ofstream o(r.golden, std::ios::binary | std::ios::trunc);
        for (const auto& line : result.captured) {
            o << line << "\n";
        }
        out << "wrote " << result.captured.size() << " frames to " << r.golden << "\n";
        return exit_ok;
    }
    std::vector<std::string> golden;
    try {
        golden = replay::read_lines(r.golden);
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return exit_config;
    }
    auto diff = replay::diff_captures(golden, result.captured);
    if (diff.identical) {
        return exit_ok;
    }
    out << diff.text;
    return exit_diff;
}

} // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    if (!spdlog::get("agora")) {
        spdlog::set_default_logger(spdlog::stderr_color_mt("agora"));
    }

    CLI::App app{"agora: multi-agent chat orchestration server"};
    app.require_subcommand(1);

    CommonFlags serve_flags;
    int port = 8080;
    std::string log_dir = "./logs";
    auto* s = app.add_subcommand("serve", "run the WebSocket server");
    s->add_option("--port", port, "TCP port (0 picks a free port)")->check(CLI::Range(0, 65535));
    s->add_option("--agents", serve_flags.agents, "directory of *.agent files");
    s->add_option("--plan", serve_flags.plan, "activity plan file");
    s->add_option("--log-dir", log_dir, "session log directory");
    s->add_option("--mock-llm", serve_flags.mock_llm, "mock backend script (replaces HTTP)");
    s->add_option("--config", serve_flags.config, "server.conf");

    CommonFlags replay_flags;
    ReplayFlags rf;
    auto* r = app.add_subcommand("replay", "replay a transcript on a virtual clock");
    r->add_option("transcript", rf.transcript, "transcript JSONL")->required();
    r->add_option("--golden", rf.golden, "expected capture JSONL");
    r->add_flag("--update", rf.update, "rewrite the golden file from this run");
    r->add_option("--out", rf.out_path, "write the captured frames here");
    r->add_option("--mock-llm", replay_flags.mock_llm, "mock backend script")->required();
    r->add_option("--agents", replay_flags.agents, "directory of *.agent files");
    r->add_option("--plan", replay_flags.plan, "activity plan file");
    r->add_option("--config", replay_flags.config, "server.conf");
    r->add_option("--mock-latency-ms", rf.latency_ms, "virtual latency of each completion")->check(CLI::NonNegativeNumber);
    r->add_option("--drain-ms", rf.drain_ms, "run time after the last input when there is no end line")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_config;
    }

    if (*s) {
        return serve(serve_flags, port, log_dir, out, err);
    }
    return replay(replay_flags, rf, out, err);
}

} // namespace agora::cli
