#pragma once

#include "agora/actors.hpp"
#include "agora/domain.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agora {

class Coordinator;
class History;

struct LlmParams {
    std::string provider_url;
    std::string model;
    // Name of the environment variable holding the API key; empty for none.
    std::string api_key_env;
    double temperature = 0.2;
    std::size_t context_length = 5;
    double request_timeout_s = 30.0;

    bool operator==(const LlmParams&) const = default;
};

struct PersonaParams {
    std::string agent_name;
    std::string scenario;
    std::string instructions;
    // Event labels that trigger the agent; "chat" is every human turn.
    std::vector<std::string> interests{"chat"};
    std::string style;
    std::string examples;
    ProposalDefaults defaults;
    std::string pass_sentinel = "[PASS]";

    bool operator==(const PersonaParams&) const = default;
};

struct AgentConfig {
    LlmParams llm;
    PersonaParams persona;

    bool operator==(const AgentConfig&) const = default;
};

struct TranscriptEntry {
    std::string speaker;
    std::string text;

    std::string rendered() const { return speaker + ": " + text; }
    bool operator==(const TranscriptEntry&) const = default;
};

struct PromptBundle {
    std::string system;
    std::vector<TranscriptEntry> transcript;
    // The final transcript entry, when there is one.
    std::optional<TranscriptEntry> latest;

    bool operator==(const PromptBundle&) const = default;
};

// System text: scenario, instructions, style and examples (non-empty parts,
// blank-line separated) followed by the pass-sentinel footer.
std::string system_text(const PersonaParams& persona);
PromptBundle build_prompt(const PersonaParams& persona, std::span<const ChatMessage> history);

// Chat-completions request body.
nlohmann::json chat_request_body(const LlmParams& params, const PromptBundle& bundle);

enum class LlmFailure { timeout, http_error, malformed_response };

std::string_view to_string(LlmFailure failure) noexcept;

struct Completion {
    enum class Kind { text, pass, error };

    Kind kind = Kind::pass;
    std::string text;
    LlmFailure failure = LlmFailure::http_error;
    int status = 0;
    std::string detail;

    static Completion of_text(std::string t) { return {Kind::text, std::move(t), {}, 0, {}}; }
    static Completion pass() { return {Kind::pass, {}, {}, 0, {}}; }
    static Completion error(LlmFailure f, int status, std::string detail)
    {
        return {Kind::error, {}, f, status, std::move(detail)};
    }
};

// Maps raw completion text to text or pass (trimmed text equal to the sentinel).
Completion classify_completion(std::string text, std::string_view pass_sentinel);

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual Completion complete(const AgentConfig& agent, const PromptBundle& bundle) = 0;
};

/// Deterministic scripted backend. Script lines are `<agent_name> | <text>`,
/// consumed first-in first-out per agent; an exhausted agent passes. A text
/// of `!error` fails that call with HTTP 500. Every request is captured.
class MockBackend final : public LlmBackend {
public:
    struct Request {
        std::string agent;
        PromptBundle bundle;
        nlohmann::json body;
    };

    MockBackend() = default;
    explicit MockBackend(std::string_view script);
    static MockBackend from_file(const std::string& path);

    Completion complete(const AgentConfig& agent, const PromptBundle& bundle) override;

    // Every call fails with HTTP 503 while set.
    void set_fail_all(bool fail) { fail_all_ = fail; }

    std::vector<Request> requests() const;
    std::size_t remaining(const std::string& agent) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> script_;
    std::map<std::string, std::size_t> cursor_;
    std::vector<Request> requests_;
    bool fail_all_ = false;
};

// Runs a completion off the session's execution context and delivers the
// result back onto it.
class AsyncRunner {
public:
    virtual ~AsyncRunner() = default;
    virtual void run(std::function<Completion()> work, std::function<void(Completion)> done) = 0;
};

/// The LLM listener/actor pair for one agent in one session. Interested
/// events trigger a request built from the latest context; at most one
/// request is in flight, later triggers coalesce into a single follow-up.
class LlmAgent : public std::enable_shared_from_this<LlmAgent> {
public:
    struct Services {
        const Clock& clock;
        History& history;
        Coordinator& coordinator;
        LlmBackend& backend;
        AsyncRunner& runner;
        ProposalIds& ids;
    };

    LlmAgent(AgentConfig config, SessionId session, Services services);

    const std::string& name() const noexcept { return config_.persona.agent_name; }
    bool interested_in(std::string_view label) const;

    void on_event(const AnnotatedEvent& event);

    bool in_flight() const noexcept { return in_flight_; }
    std::size_t requests_issued() const noexcept { return requests_issued_; }
    std::size_t proposals_submitted() const noexcept { return proposals_submitted_; }

private:
    void fire(std::string trigger_event_id);
    void on_completion(const std::string& trigger_event_id, const Completion& completion);

    AgentConfig config_;
    SessionId session_;
    Services services_;
    bool in_flight_ = false;
    std::optional<std::string> coalesced_;
    std::size_t requests_issued_ = 0;
    std::size_t proposals_submitted_ = 0;
};

} // namespace agora
