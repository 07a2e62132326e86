#include "agora/http_backend.hpp"

#include <spdlog/spdlog.h>

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace agora {

using nlohmann::json;

ParsedUrl parse_url(const std::string& url)
{
    ParsedUrl out;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("URL needs a scheme: " + url);
    }
    out.scheme = url.substr(0, scheme_end);
    if (out.scheme != "http" && out.scheme != "https") {
        throw std::invalid_argument("unsupported URL scheme: " + out.scheme);
    }
    const auto rest = url.substr(scheme_end + 3);
    const auto slash = rest.find('/');
    const auto authority = rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos && authority.find(']') == std::string::npos) {
        out.host = authority.substr(0, colon);
        try {
            std::size_t used = 0;
            out.port = std::stoi(authority.substr(colon + 1), &used);
            if (used != authority.size() - colon - 1 || out.port <= 0 || out.port > 65535) {
                throw std::invalid_argument("port");
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad port in URL: " + url);
        }
    } else {
        out.host = authority;
        out.port = out.scheme == "https" ? 443 : 80;
    }
    if (out.host.empty()) {
        throw std::invalid_argument("URL has no host: " + url);
    }
    return out;
}

namespace {

Completion from_error(httplib::Error err)
{
    switch (err) {
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::Read:
        return Completion::error(LlmFailure::timeout, 0, "request timed out or connection dropped");
    default:
        return Completion::error(LlmFailure::http_error, 0, "request failed: " + httplib::to_string(err));
    }
}

template <typename Client>
Completion post(Client& client, const ParsedUrl& url, const AgentConfig& agent, const std::string& body)
{
    const double timeout = agent.llm.request_timeout_s;
    const auto sec = static_cast<time_t>(std::floor(timeout));
    const auto usec = static_cast<time_t>((timeout - std::floor(timeout)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    httplib::Headers headers;
    if (!agent.llm.api_key_env.empty()) {
        if (const char* key = std::getenv(agent.llm.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    spdlog::debug("POST {}://{}:{}{} model={} bytes={} auth={}", url.scheme, url.host, url.port, url.path,
                  agent.llm.model, body.size(), headers.empty() ? "none" : "bearer");
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
        return from_error(res.error());
    }
    if (res->status < 200 || res->status >= 300) {
        return Completion::error(LlmFailure::http_error, res->status, "HTTP status " + std::to_string(res->status));
    }
    json j = json::parse(res->body, nullptr, false);
    try {
        if (j.is_discarded()) {
            throw std::runtime_error("not JSON");
        }
        auto content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        return classify_completion(std::move(content), agent.persona.pass_sentinel);
    } catch (const std::exception&) {
        return Completion::error(LlmFailure::malformed_response, res->status,
                                 "response lacks choices[0].message.content");
    }
}

} // namespace

Completion HttpBackend::complete(const AgentConfig& agent, const PromptBundle& bundle)
{
    ParsedUrl url;
    try {
        url = parse_url(agent.llm.provider_url);
    } catch (const std::exception& e) {
        return Completion::error(LlmFailure::http_error, 0, e.what());
    }
    const std::string body = chat_request_body(agent.llm, bundle).dump();
    if (url.scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        httplib::SSLClient client(url.host, url.port);
        return post(client, url, agent, body);
#else
        return Completion::error(LlmFailure::http_error, 0, "built without TLS support");
#endif
    }
    httplib::Client client(url.host, url.port);
    return post(client, url, agent, body);
}

} // namespace agora
