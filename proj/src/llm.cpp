#include "agora/llm.hpp"

#include "agora/coordinator.hpp"
#include "agora/history.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agora {

using nlohmann::json;

std::string system_text(const PersonaParams& persona)
{
    std::string out;
    for (const auto* part : {&persona.scenario, &persona.instructions, &persona.style, &persona.examples}) {
        if (trim(*part).empty()) {
            continue;
        }
        out += *part;
        out += "\n\n";
    }
    out += "If you have nothing useful to add to the conversation right now, reply with exactly " +
           persona.pass_sentinel + " and nothing else.";
    return out;
}

PromptBundle build_prompt(const PersonaParams& persona, std::span<const ChatMessage> history)
{
    PromptBundle bundle{system_text(persona), {}, std::nullopt};
    bundle.transcript.reserve(history.size());
    for (const auto& m : history) {
        bundle.transcript.push_back(TranscriptEntry{m.sender, m.text});
    }
    if (!bundle.transcript.empty()) {
        bundle.latest = bundle.transcript.back();
    }
    return bundle;
}

json chat_request_body(const LlmParams& params, const PromptBundle& bundle)
{
    json messages = json::array();
    messages.push_back({{"role", "system"}, {"content", bundle.system}});
    for (const auto& entry : bundle.transcript) {
        messages.push_back({{"role", "user"}, {"content", entry.rendered()}});
    }
    return json{{"model", params.model}, {"temperature", params.temperature}, {"messages", std::move(messages)}};
}

std::string_view to_string(LlmFailure failure) noexcept
{
    switch (failure) {
    case LlmFailure::timeout: return "timeout";
    case LlmFailure::http_error: return "http_error";
    case LlmFailure::malformed_response: return "malformed_response";
    }
    return "http_error";
}

Completion classify_completion(std::string text, std::string_view pass_sentinel)
{
    if (trim(text) == pass_sentinel || trim(text).empty()) {
        return Completion::pass();
    }
    return Completion::of_text(std::move(text));
}

MockBackend::MockBackend(std::string_view script)
{
    std::istringstream in{std::string(script)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line).front() == '#') {
            continue;
        }
        const auto bar = line.find('|');
        if (bar == std::string::npos) {
            throw std::invalid_argument("mock script line " + std::to_string(line_no) + ": expected 'agent | text'");
        }
        auto agent = trim(std::string_view(line).substr(0, bar));
        auto text = trim(std::string_view(line).substr(bar + 1));
        if (agent.empty()) {
            throw std::invalid_argument("mock script line " + std::to_string(line_no) + ": empty agent name");
        }
        script_[agent].push_back(std::move(text));
    }
}

MockBackend MockBackend::from_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read mock script " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return MockBackend(ss.str());
}

Completion MockBackend::complete(const AgentConfig& agent, const PromptBundle& bundle)
{
    std::lock_guard lock(mutex_);
    const auto& name = agent.persona.agent_name;
    requests_.push_back(Request{name, bundle, chat_request_body(agent.llm, bundle)});
    if (fail_all_) {
        return Completion::error(LlmFailure::http_error, 503, "mock backend failing all calls");
    }
    auto it = script_.find(name);
    auto& cursor = cursor_[name];
    if (it == script_.end() || cursor >= it->second.size()) {
        return Completion::pass();
    }
    std::string text = it->second[cursor++];
    if (text == "!error") {
        return Completion::error(LlmFailure::http_error, 500, "scripted failure");
    }
    return classify_completion(std::move(text), agent.persona.pass_sentinel);
}

std::vector<MockBackend::Request> MockBackend::requests() const
{
    std::lock_guard lock(mutex_);
    return requests_;
}

std::size_t MockBackend::remaining(const std::string& agent) const
{
    std::lock_guard lock(mutex_);
    auto it = script_.find(agent);
    if (it == script_.end()) {
        return 0;
    }
    auto c = cursor_.find(agent);
    const std::size_t used = c == cursor_.end() ? 0 : c->second;
    return it->second.size() - std::min(used, it->second.size());
}

LlmAgent::LlmAgent(AgentConfig config, SessionId session, Services services)
    : config_(std::move(config)), session_(std::move(session)), services_(services)
{
}

bool LlmAgent::interested_in(std::string_view label) const
{
    const auto& interests = config_.persona.interests;
    return std::find(interests.begin(), interests.end(), label) != interests.end();
}

void LlmAgent::on_event(const AnnotatedEvent& event)
{
    if (!interested_in(event.label)) {
        return;
    }
    if (in_flight_) {
        coalesced_ = event.id;
        return;
    }
    fire(event.id);
}

void LlmAgent::fire(std::string trigger_event_id)
{
    in_flight_ = true;
    ++requests_issued_;
    const auto context = services_.history.last_n(session_, config_.llm.context_length);
    auto bundle = build_prompt(config_.persona, context);
    auto* backend = &services_.backend;
    std::weak_ptr<LlmAgent> self = weak_from_this();
    services_.runner.run(
        [backend, config = config_, bundle = std::move(bundle)]() { return backend->complete(config, bundle); },
        [self, trigger = std::move(trigger_event_id)](Completion completion) {
            if (auto agent = self.lock()) {
                agent->on_completion(trigger, completion);
            }
        });
}

void LlmAgent::on_completion(const std::string& trigger_event_id, const Completion& completion)
{
    in_flight_ = false;
    switch (completion.kind) {
    case Completion::Kind::text: {
        const auto& d = config_.persona.defaults;
        Proposal p{services_.ids.next(),
                   session_,
                   config_.persona.agent_name,
                   Say{config_.persona.agent_name, completion.text},
                   d.priority,
                   d.timeout_s,
                   d.decay_rate,
                   services_.clock.now_ms(),
                   trigger_event_id};
        if (services_.coordinator.submit(std::move(p))) {
            ++proposals_submitted_;
        }
        break;
    }
    case Completion::Kind::pass:
        spdlog::debug("agent {} passed on {}", name(), trigger_event_id);
        break;
    case Completion::Kind::error:
        spdlog::warn("agent {} request failed ({}, status {}): {}", name(), to_string(completion.failure),
                     completion.status, completion.detail);
        break;
    }
    if (coalesced_) {
        auto next = std::move(*coalesced_);
        coalesced_.reset();
        fire(std::move(next));
    }
}

} // namespace agora
