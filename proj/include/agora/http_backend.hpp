#pragma once

#include "agora/llm.hpp"

#include <string>

namespace agora {

struct ParsedUrl {
    std::string scheme; // "http" or "https"
    std::string host;
    int port = 0;
    std::string path; // at least "/"
};

// Throws std::invalid_argument for anything but http(s)://host[:port][/path].
ParsedUrl parse_url(const std::string& url);

/// Chat-completions client: POST <provider_url> with a bearer token read
/// from the agent's api_key_env at request time. One attempt per call.
class HttpBackend final : public LlmBackend {
public:
    Completion complete(const AgentConfig& agent, const PromptBundle& bundle) override;
};

} // namespace agora
