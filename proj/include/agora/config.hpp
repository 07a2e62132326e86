#pragma once

// Plain-text configuration: INI-like sections and `key = value` lines,
// full-line `#` comments, and `key = """` ... `"""` multi-line blocks.

#include "agora/actors.hpp"
#include "agora/coordinator.hpp"
#include "agora/listeners.hpp"
#include "agora/llm.hpp"
#include "agora/plan.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agora::config {

struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<Entry> entries; // file order

    const Entry* find(std::string_view key) const;
};

struct ConfigDocument {
    std::string source;
    std::vector<Section> sections; // file order

    const Section* find(std::string_view name) const;
};

enum class IssueKind {
    duplicate_key,
    duplicate_section,
    unterminated_block,
    key_outside_section,
    bad_header,
    bad_line,
    missing_section,
    missing_key,
    unknown_section,
    unknown_key,
    type_error,
    gap_in_stages,
    bad_trigger,
    empty_stage,
    unreadable,
};

std::string_view to_string(IssueKind kind) noexcept;

struct Issue {
    IssueKind kind;
    std::size_t line = 0; // 0 when the problem has no single line
    std::string section;
    std::string key;
    std::string expected; // for type_error: what the value should be

    std::string describe() const;
    bool operator==(const Issue&) const = default;
};

// Every problem found in one document, in line order.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, std::vector<Issue> issues);

    const std::string& source() const noexcept { return source_; }
    const std::vector<Issue>& issues() const noexcept { return issues_; }

private:
    std::string source_;
    std::vector<Issue> issues_;
};

ConfigDocument parse(std::string_view text, std::string source = {});
ConfigDocument parse_file(const std::filesystem::path& path);

AgentConfig load_agent(const ConfigDocument& doc);
Plan load_plan(const ConfigDocument& doc);

struct ListenerParams {
    double inactivity_s = 120.0;
    RuleTable greeting_rules = default_greeting_rules();
    RuleTable apt_rules = default_apt_rules();
};

struct ServerConfig {
    CoordinatorParams coordinator;
    ListenerParams listeners;
    std::vector<ResponseTemplate> actors = default_response_templates();
};

// [coordinator], [listeners] and [actor.<name>] sections. Rule-table paths
// are resolved relative to the document's directory.
ServerConfig load_server(const ConfigDocument& doc);

// Canonical rendering; load_agent(parse(render_agent(a))) == a.
std::string render_agent(const AgentConfig& agent);

AgentConfig load_agent_file(const std::filesystem::path& path);
Plan load_plan_file(const std::filesystem::path& path);
ServerConfig load_server_file(const std::filesystem::path& path);

// Every `*.agent` file in `dir`, sorted by file name. Aggregates the errors
// of all files into one ConfigError (source = dir).
std::vector<AgentConfig> load_agents_dir(const std::filesystem::path& dir);

} // namespace agora::config
