#include "agora/config.hpp"

#include "agora/http_backend.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace agora::config {

namespace {

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path.string(), {Issue{IssueKind::unreadable, 0, "", "", "readable file"}});
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool valid_key(std::string_view key)
{
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
}

std::optional<double> to_real(std::string_view text)
{
    double v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return v;
}

std::optional<long long> to_integer(std::string_view text)
{
    long long v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return v;
}

std::string format_real(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::string> split_list(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) {
            comma = text.size();
        }
        auto item = trim(text.substr(pos, comma - pos));
        if (!item.empty()) {
            out.push_back(std::move(item));
        }
        pos = comma + 1;
    }
    return out;
}

// Reads typed values from one section, recording issues; tracks which keys
// were consumed so leftovers can be reported as unknown.
class SectionReader {
public:
    SectionReader(const Section* section, std::string name, std::vector<Issue>& issues)
        : section_(section), name_(std::move(name)), issues_(issues)
    {
    }

    const Entry* raw(std::string_view key)
    {
        used_.insert(std::string(key));
        return section_ ? section_->find(key) : nullptr;
    }

    std::optional<std::string> text(std::string_view key, bool required)
    {
        const auto* e = raw(key);
        if (!e) {
            if (required) {
                issues_.push_back(Issue{IssueKind::missing_key, section_ ? section_->line : 0, name_,
                                        std::string(key), ""});
            }
            return std::nullopt;
        }
        return e->value;
    }

    std::optional<double> real(std::string_view key, bool required, double lo, double hi, bool lo_open,
                               const char* range)
    {
        const auto* e = raw(key);
        if (!e) {
            if (required) {
                issues_.push_back(Issue{IssueKind::missing_key, section_ ? section_->line : 0, name_,
                                        std::string(key), ""});
            }
            return std::nullopt;
        }
        auto v = to_real(e->value);
        if (!v) {
            type_error(*e, "real");
            return std::nullopt;
        }
        if ((lo_open ? !(*v > lo) : !(*v >= lo)) || !(*v <= hi)) {
            type_error(*e, std::string("range ") + range);
            return std::nullopt;
        }
        return v;
    }

    std::optional<long long> integer(std::string_view key, bool required, long long lo, const char* range)
    {
        const auto* e = raw(key);
        if (!e) {
            if (required) {
                issues_.push_back(Issue{IssueKind::missing_key, section_ ? section_->line : 0, name_,
                                        std::string(key), ""});
            }
            return std::nullopt;
        }
        auto v = to_integer(e->value);
        if (!v) {
            type_error(*e, "integer");
            return std::nullopt;
        }
        if (*v < lo) {
            type_error(*e, std::string("range ") + range);
            return std::nullopt;
        }
        return v;
    }

    void type_error(const Entry& e, std::string expected)
    {
        issues_.push_back(Issue{IssueKind::type_error, e.line, name_, e.key, std::move(expected)});
    }

    void report_unknown(std::string_view allowed_prefix = {})
    {
        if (!section_) {
            return;
        }
        for (const auto& e : section_->entries) {
            if (used_.contains(e.key)) {
                continue;
            }
            if (!allowed_prefix.empty() && e.key.starts_with(allowed_prefix)) {
                continue;
            }
            issues_.push_back(Issue{IssueKind::unknown_key, e.line, name_, e.key, ""});
        }
    }

private:
    const Section* section_;
    std::string name_;
    std::vector<Issue>& issues_;
    std::set<std::string> used_;
};

void finish(const ConfigDocument& doc, std::vector<Issue>& issues)
{
    if (issues.empty()) {
        return;
    }
    std::stable_sort(issues.begin(), issues.end(), [](const Issue& a, const Issue& b) { return a.line < b.line; });
    throw ConfigError(doc.source, std::move(issues));
}

constexpr double inf = std::numeric_limits<double>::infinity();

} // namespace

const Entry* Section::find(std::string_view key) const
{
    auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.key == key; });
    return it == entries.end() ? nullptr : &*it;
}

const Section* ConfigDocument::find(std::string_view name) const
{
    auto it = std::find_if(sections.begin(), sections.end(), [&](const Section& s) { return s.name == name; });
    return it == sections.end() ? nullptr : &*it;
}

std::string_view to_string(IssueKind kind) noexcept
{
    switch (kind) {
    case IssueKind::duplicate_key: return "DuplicateKey";
    case IssueKind::duplicate_section: return "DuplicateSection";
    case IssueKind::unterminated_block: return "UnterminatedBlock";
    case IssueKind::key_outside_section: return "KeyOutsideSection";
    case IssueKind::bad_header: return "BadHeader";
    case IssueKind::bad_line: return "BadLine";
    case IssueKind::missing_section: return "MissingSection";
    case IssueKind::missing_key: return "MissingKey";
    case IssueKind::unknown_section: return "UnknownSection";
    case IssueKind::unknown_key: return "UnknownKey";
    case IssueKind::type_error: return "TypeError";
    case IssueKind::gap_in_stages: return "GapInStages";
    case IssueKind::bad_trigger: return "BadTrigger";
    case IssueKind::empty_stage: return "EmptyStage";
    case IssueKind::unreadable: return "Unreadable";
    }
    return "Unknown";
}

std::string Issue::describe() const
{
    std::string out(to_string(kind));
    if (line > 0) {
        out += " at line " + std::to_string(line);
    }
    if (!section.empty()) {
        out += " [" + section + "]";
    }
    if (!key.empty()) {
        out += " " + key;
    }
    if (!expected.empty()) {
        out += " (expected " + expected + ")";
    }
    return out;
}

namespace {

std::string error_message(const std::string& source, const std::vector<Issue>& issues)
{
    std::string out = (source.empty() ? std::string("config") : source) + ": " + std::to_string(issues.size()) +
                      " problem(s)";
    for (const auto& i : issues) {
        out += "\n  " + i.describe();
    }
    return out;
}

} // namespace

ConfigError::ConfigError(std::string source, std::vector<Issue> issues)
    : std::runtime_error(error_message(source, issues)), source_(std::move(source)), issues_(std::move(issues))
{
}

ConfigDocument parse(std::string_view text, std::string source)
{
    ConfigDocument doc{std::move(source), {}};
    std::vector<Issue> issues;
    std::vector<std::string> lines;
    {
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            lines.push_back(std::move(line));
        }
    }

    Section* current = nullptr;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const std::string t = trim(lines[i]);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        if (t.front() == '[') {
            const std::string name = t.back() == ']' ? trim(std::string_view(t).substr(1, t.size() - 2)) : "";
            if (t.back() != ']' || !valid_key(name)) {
                issues.push_back(Issue{IssueKind::bad_header, line_no, "", "", ""});
                current = nullptr;
                continue;
            }
            if (doc.find(name)) {
                issues.push_back(Issue{IssueKind::duplicate_section, line_no, name, "", ""});
                current = nullptr;
                continue;
            }
            doc.sections.push_back(Section{name, line_no, {}});
            current = &doc.sections.back();
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            issues.push_back(Issue{IssueKind::bad_line, line_no, current ? current->name : "", "", ""});
            continue;
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));

        if (value == R"(""")") {
            std::size_t close = i + 1;
            while (close < lines.size() && trim(lines[close]) != R"(""")") {
                ++close;
            }
            if (close == lines.size()) {
                issues.push_back(Issue{IssueKind::unterminated_block, line_no, current ? current->name : "", key, ""});
                break;
            }
            value.clear();
            for (std::size_t k = i + 1; k < close; ++k) {
                if (k > i + 1) {
                    value += '\n';
                }
                value += lines[k];
            }
            i = close;
        }

        if (!valid_key(key)) {
            issues.push_back(Issue{IssueKind::bad_line, line_no, current ? current->name : "", key, ""});
            continue;
        }
        if (!current) {
            // A bad header also lands here; only report keys truly before any header.
            if (doc.sections.empty() &&
                std::none_of(issues.begin(), issues.end(),
                             [](const Issue& x) { return x.kind == IssueKind::bad_header; })) {
                issues.push_back(Issue{IssueKind::key_outside_section, line_no, "", key, ""});
            }
            continue;
        }
        if (current->find(key)) {
            issues.push_back(Issue{IssueKind::duplicate_key, line_no, current->name, key, ""});
            continue;
        }
        current->entries.push_back(Entry{key, std::move(value), line_no});
    }
    finish(doc, issues);
    return doc;
}

ConfigDocument parse_file(const std::filesystem::path& path)
{
    return parse(read_file(path), path.string());
}

AgentConfig load_agent(const ConfigDocument& doc)
{
    std::vector<Issue> issues;
    AgentConfig out;
    const auto* llm = doc.find("llm");
    const auto* persona = doc.find("persona");
    if (!llm) {
        issues.push_back(Issue{IssueKind::missing_section, 0, "llm", "", ""});
    }
    if (!persona) {
        issues.push_back(Issue{IssueKind::missing_section, 0, "persona", "", ""});
    }
    for (const auto& s : doc.sections) {
        if (s.name != "llm" && s.name != "persona") {
            issues.push_back(Issue{IssueKind::unknown_section, s.line, s.name, "", ""});
        }
    }

    if (llm) {
        SectionReader r(llm, "llm", issues);
        if (auto url = r.text("provider_url", true)) {
            try {
                parse_url(*url);
                out.llm.provider_url = *url;
            } catch (const std::invalid_argument&) {
                r.type_error(*llm->find("provider_url"), "http(s) URL");
            }
        }
        if (auto v = r.text("model", true)) {
            out.llm.model = *v;
        }
        if (auto v = r.text("api_key_env", false)) {
            out.llm.api_key_env = *v;
        }
        if (auto v = r.real("temperature", true, 0.0, 2.0, false, "[0,2]")) {
            out.llm.temperature = *v;
        }
        if (auto v = r.integer("context_length", true, 1, ">= 1")) {
            out.llm.context_length = static_cast<std::size_t>(*v);
        }
        if (auto v = r.real("request_timeout_s", false, 0.0, inf, true, "> 0")) {
            out.llm.request_timeout_s = *v;
        }
        r.report_unknown();
    }

    if (persona) {
        SectionReader r(persona, "persona", issues);
        if (auto v = r.text("agent_name", true)) {
            out.persona.agent_name = *v;
        }
        if (auto v = r.text("instructions", true)) {
            out.persona.instructions = *v;
        }
        if (auto v = r.text("scenario", false)) {
            out.persona.scenario = *v;
        }
        if (auto v = r.text("style", false)) {
            out.persona.style = *v;
        }
        if (auto v = r.text("examples", false)) {
            out.persona.examples = *v;
        }
        if (auto v = r.text("interests", false)) {
            auto list = split_list(*v);
            if (list.empty()) {
                r.type_error(*persona->find("interests"), "non-empty label list");
            } else {
                out.persona.interests = std::move(list);
            }
        }
        if (auto v = r.real("priority", false, 0.0, 1.0, false, "[0,1]")) {
            out.persona.defaults.priority = *v;
        }
        if (auto v = r.real("timeout_s", false, 0.0, inf, true, "> 0")) {
            out.persona.defaults.timeout_s = *v;
        }
        if (auto v = r.real("decay_rate", false, 0.0, inf, false, ">= 0")) {
            out.persona.defaults.decay_rate = *v;
        }
        if (auto v = r.text("pass_sentinel", false)) {
            out.persona.pass_sentinel = *v;
        }
        r.report_unknown();
    }
    finish(doc, issues);
    return out;
}

namespace {

std::optional<StageTrigger> parse_trigger(std::string_view text)
{
    if (text.starts_with("after:")) {
        auto v = to_real(trim(text.substr(6)));
        if (!v || !(*v >= 0.0) || !std::isfinite(*v)) {
            return std::nullopt;
        }
        return AfterSeconds{*v};
    }
    if (text.starts_with("event:")) {
        auto rest = text.substr(6);
        OnEvent on;
        const auto colon = rest.find(':');
        on.label = trim(rest.substr(0, colon));
        if (!valid_key(on.label)) {
            return std::nullopt;
        }
        if (colon != std::string_view::npos) {
            auto match = rest.substr(colon + 1);
            const auto eq = match.find('=');
            if (eq == std::string_view::npos) {
                return std::nullopt;
            }
            auto key = trim(match.substr(0, eq));
            auto value = trim(match.substr(eq + 1));
            if (key.empty() || value.empty()) {
                return std::nullopt;
            }
            on.match = std::make_pair(std::move(key), std::move(value));
        }
        return on;
    }
    return std::nullopt;
}

std::optional<Payload> parse_command_payload(std::string_view text)
{
    Payload payload;
    for (const auto& item : split_list(text)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            return std::nullopt;
        }
        auto key = trim(std::string_view(item).substr(0, eq));
        if (key.empty() || payload.contains(key)) {
            return std::nullopt;
        }
        payload[key] = trim(std::string_view(item).substr(eq + 1));
    }
    return payload;
}

} // namespace

Plan load_plan(const ConfigDocument& doc)
{
    std::vector<Issue> issues;
    Plan plan;
    std::map<long long, const Section*> stages;

    for (const auto& s : doc.sections) {
        if (s.name == "plan") {
            SectionReader r(&s, "plan", issues);
            if (auto v = r.text("author", false)) {
                plan.author = *v;
            }
            r.report_unknown();
            continue;
        }
        std::optional<long long> k;
        if (s.name.starts_with("stage.")) {
            k = to_integer(std::string_view(s.name).substr(6));
        }
        if (!k || *k < 1) {
            issues.push_back(Issue{IssueKind::unknown_section, s.line, s.name, "", ""});
            continue;
        }
        stages.emplace(*k, &s);
    }

    if (stages.empty()) {
        issues.push_back(Issue{IssueKind::missing_section, 0, "stage.1", "", ""});
    }
    long long expected = 1;
    for (const auto& [k, s] : stages) {
        if (k != expected) {
            issues.push_back(Issue{IssueKind::gap_in_stages, s->line, s->name, "",
                                   "stage." + std::to_string(expected)});
            expected = k;
        }
        ++expected;
    }

    for (const auto& [k, s] : stages) {
        SectionReader r(s, s->name, issues);
        Stage stage;
        stage.id = std::to_string(k);
        bool ok = true;
        if (auto v = r.text("trigger", true)) {
            if (auto trigger = parse_trigger(*v)) {
                stage.trigger = *trigger;
            } else {
                issues.push_back(Issue{IssueKind::bad_trigger, s->find("trigger")->line, s->name, "trigger", ""});
                ok = false;
            }
        } else {
            ok = false;
        }
        if (auto v = r.text("prompt", false)) {
            stage.prompt = *v;
        }
        for (const auto& e : s->entries) {
            if (!e.key.starts_with("command.")) {
                continue;
            }
            const auto name = e.key.substr(8);
            auto payload = parse_command_payload(e.value);
            if (name.empty() || !payload) {
                r.type_error(e, "command.<name> = key=value,...");
                ok = false;
                continue;
            }
            stage.commands.push_back(StageCommand{name, std::move(*payload)});
        }
        r.report_unknown("command.");
        if (!stage.prompt && std::none_of(s->entries.begin(), s->entries.end(),
                                          [](const Entry& e) { return e.key.starts_with("command."); })) {
            issues.push_back(Issue{IssueKind::empty_stage, s->line, s->name, "", ""});
            ok = false;
        }
        if (ok) {
            plan.stages.push_back(std::move(stage));
        }
    }
    finish(doc, issues);
    return plan;
}

ServerConfig load_server(const ConfigDocument& doc)
{
    std::vector<Issue> issues;
    ServerConfig out;
    const auto base = std::filesystem::path(doc.source).parent_path();

    for (const auto& s : doc.sections) {
        if (s.name == "coordinator") {
            SectionReader r(&s, s.name, issues);
            if (auto v = r.integer("tick_interval_ms", false, 1, ">= 1")) {
                out.coordinator.tick_interval_ms = *v;
            }
            if (auto v = r.real("cooldown_s", false, 0.0, inf, false, ">= 0")) {
                out.coordinator.cooldown_s = *v;
            }
            if (auto v = r.real("emit_floor", false, 0.0, 1.0, false, "[0,1]")) {
                out.coordinator.emit_floor = *v;
            }
            if (auto v = r.text("pass_sentinel", false)) {
                out.coordinator.pass_sentinel = *v;
            }
            if (auto v = r.integer("max_say_chars", false, 1, ">= 1")) {
                out.coordinator.max_say_chars = static_cast<std::size_t>(*v);
            }
            if (auto v = r.integer("repeat_window", false, 0, ">= 0")) {
                out.coordinator.repeat_window = static_cast<std::size_t>(*v);
            }
            r.report_unknown();
        } else if (s.name == "listeners") {
            SectionReader r(&s, s.name, issues);
            if (auto v = r.real("inactivity_s", false, 0.0, inf, true, "> 0")) {
                out.listeners.inactivity_s = *v;
            }
            for (auto [key, table] : {std::pair{"greeting_rules", &out.listeners.greeting_rules},
                                      std::pair{"apt_rules", &out.listeners.apt_rules}}) {
                if (auto v = r.text(key, false)) {
                    auto path = std::filesystem::path(*v);
                    if (path.is_relative()) {
                        path = base / path;
                    }
                    try {
                        *table = load_rule_table(path.string());
                    } catch (const std::invalid_argument& e) {
                        r.type_error(*s.find(key), std::string("readable rule table: ") + e.what());
                    }
                }
            }
            r.report_unknown();
        } else if (s.name.starts_with("actor.") && s.name.size() > 6) {
            SectionReader r(&s, s.name, issues);
            ResponseTemplate t;
            t.actor = s.name.substr(6);
            auto existing = std::find_if(out.actors.begin(), out.actors.end(),
                                         [&](const ResponseTemplate& a) { return a.actor == t.actor; });
            if (existing != out.actors.end()) {
                t = *existing;
            }
            const bool fresh = existing == out.actors.end();
            if (auto v = r.text("label", fresh)) {
                t.label = *v;
            }
            if (auto v = r.text("template", fresh)) {
                t.text = *v;
            }
            if (auto v = r.text("author", false)) {
                t.author = *v;
            }
            if (auto v = r.real("priority", false, 0.0, 1.0, false, "[0,1]")) {
                t.defaults.priority = *v;
            }
            if (auto v = r.real("timeout_s", false, 0.0, inf, true, "> 0")) {
                t.defaults.timeout_s = *v;
            }
            if (auto v = r.real("decay_rate", false, 0.0, inf, false, ">= 0")) {
                t.defaults.decay_rate = *v;
            }
            bool enabled = true;
            if (auto v = r.text("enabled", false)) {
                if (*v == "false" || *v == "no" || *v == "0") {
                    enabled = false;
                } else if (*v != "true" && *v != "yes" && *v != "1") {
                    r.type_error(*s.find("enabled"), "boolean");
                }
            }
            r.report_unknown();
            if (existing != out.actors.end()) {
                if (enabled) {
                    *existing = t;
                } else {
                    out.actors.erase(existing);
                }
            } else if (enabled) {
                out.actors.push_back(t);
            }
        } else {
            issues.push_back(Issue{IssueKind::unknown_section, s.line, s.name, "", ""});
        }
    }
    finish(doc, issues);
    return out;
}

std::string render_agent(const AgentConfig& a)
{
    std::string out;
    auto put = [&out](std::string_view key, const std::string& value) {
        const bool block = value.find('\n') != std::string::npos || trim(value) != value;
        if (block) {
            out += std::string(key) + " = \"\"\"\n" + value + "\n\"\"\"\n";
        } else {
            out += std::string(key) + " = " + value + "\n";
        }
    };
    std::string interests;
    for (const auto& i : a.persona.interests) {
        interests += (interests.empty() ? "" : ", ") + i;
    }
    out += "[llm]\n";
    put("provider_url", a.llm.provider_url);
    put("model", a.llm.model);
    if (!a.llm.api_key_env.empty()) {
        put("api_key_env", a.llm.api_key_env);
    }
    put("temperature", format_real(a.llm.temperature));
    put("context_length", std::to_string(a.llm.context_length));
    put("request_timeout_s", format_real(a.llm.request_timeout_s));
    out += "\n[persona]\n";
    put("agent_name", a.persona.agent_name);
    for (auto [key, value] : {std::pair{"scenario", &a.persona.scenario},
                              std::pair{"instructions", &a.persona.instructions},
                              std::pair{"style", &a.persona.style}, std::pair{"examples", &a.persona.examples}}) {
        if (!value->empty() || std::string_view(key) == "instructions") {
            put(key, *value);
        }
    }
    put("interests", interests);
    put("priority", format_real(a.persona.defaults.priority));
    put("timeout_s", format_real(a.persona.defaults.timeout_s));
    put("decay_rate", format_real(a.persona.defaults.decay_rate));
    put("pass_sentinel", a.persona.pass_sentinel);
    return out;
}

AgentConfig load_agent_file(const std::filesystem::path& path)
{
    return load_agent(parse_file(path));
}

Plan load_plan_file(const std::filesystem::path& path)
{
    return load_plan(parse_file(path));
}

ServerConfig load_server_file(const std::filesystem::path& path)
{
    return load_server(parse_file(path));
}

std::vector<AgentConfig> load_agents_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw ConfigError(dir.string(), {Issue{IssueKind::unreadable, 0, "", "", "agents directory"}});
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".agent") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<AgentConfig> agents;
    std::vector<Issue> issues;
    std::string messages;
    for (const auto& f : files) {
        try {
            auto agent = load_agent_file(f);
            const bool dup = std::any_of(agents.begin(), agents.end(), [&](const AgentConfig& a) {
                return a.persona.agent_name == agent.persona.agent_name;
            });
            if (dup) {
                Issue i{IssueKind::duplicate_key, 0, "persona", "agent_name", "unique agent_name"};
                messages += "\n" + f.string() + ": " + i.describe();
                issues.push_back(i);
                continue;
            }
            agents.push_back(std::move(agent));
        } catch (const ConfigError& e) {
            messages += std::string("\n") + e.what();
            issues.insert(issues.end(), e.issues().begin(), e.issues().end());
        }
    }
    if (!issues.empty()) {
        throw ConfigError(dir.string() + messages, std::move(issues));
    }
    return agents;
}

} // namespace agora::config
