#include "agora/listeners.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agora {

namespace {

constexpr std::string_view default_greeting_table = "greeting\t^\\s*(hi|hello|hey)\\b\n";

constexpr std::string_view default_apt_table =
    "apt_opportunity\t\\b(i|we|my|our)\\b.*\\b(because|so|think)\\b\n"
    "apt_opportunity\t\\b{peer}\\b.*\\?|\\?.*\\b{peer}\\b\n";

constexpr std::string_view peer_token = "{peer}";

std::string regex_escape(std::string_view text)
{
    static constexpr std::string_view special = R"(\^$.|?*+()[]{}/-)";
    std::string out;
    for (char c : text) {
        if (special.find(c) != std::string_view::npos) {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    return out;
}

std::regex compile(const std::string& pattern)
{
    return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
}

Payload chat_payload(const ChatMessage& m)
{
    return Payload{{"sender", m.sender}, {"text", m.text}, {"seq", std::to_string(m.seq)}};
}

} // namespace

Interest interest_of(const ListenerInput& input) noexcept
{
    switch (input.index()) {
    case 0: return Interest::chat;
    case 1: return Interest::state;
    default: return Interest::tick;
    }
}

AnnotatedEvent ListenerContext::make_event(std::string_view listener, std::string label, Trigger trigger,
                                           Payload payload, Assessment assessment) const
{
    return AnnotatedEvent{ids.next(), session, std::string(listener), std::move(label), std::move(assessment),
                          trigger, std::move(payload), now};
}

void EventQueue::push(AnnotatedEvent event)
{
    if (capacity_ == 0) {
        ++dropped_;
        return;
    }
    if (events_.size() >= capacity_) {
        spdlog::warn("event queue for {} full; dropping oldest event {} ({})", event.session.value(),
                     events_.front().id, events_.front().label);
        events_.pop_front();
        ++dropped_;
    }
    events_.push_back(std::move(event));
}

std::optional<AnnotatedEvent> EventQueue::pop()
{
    if (events_.empty()) {
        return std::nullopt;
    }
    auto e = std::move(events_.front());
    events_.pop_front();
    return e;
}

void ListenerSet::add(std::unique_ptr<Listener> listener)
{
    for (const auto& l : listeners_) {
        if (l->name() == listener->name()) {
            throw std::invalid_argument("duplicate listener name: " + std::string(listener->name()));
        }
    }
    listeners_.push_back(std::move(listener));
}

std::vector<AnnotatedEvent> ListenerSet::dispatch(const ListenerInput& input, ListenerContext& ctx, EventQueue& queue)
{
    const auto kind = static_cast<unsigned>(interest_of(input));
    std::vector<AnnotatedEvent> enqueued;
    for (auto& listener : listeners_) {
        if ((listener->interest() & kind) == 0) {
            continue;
        }
        std::vector<AnnotatedEvent> events;
        try {
            events = listener->on_input(input, ctx);
        } catch (const std::exception& e) {
            spdlog::error("listener {} failed: {}", listener->name(), e.what());
            continue;
        }
        for (auto& e : events) {
            queue.push(e);
            enqueued.push_back(std::move(e));
        }
    }
    return enqueued;
}

RuleTable parse_rule_table(std::string_view text)
{
    RuleTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty() || trim(line).front() == '#') {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::invalid_argument("rule table line " + std::to_string(line_no) + ": expected label<TAB>pattern");
        }
        Rule rule{trim(line.substr(0, tab)), line.substr(tab + 1), line_no};
        if (rule.label.empty() || rule.pattern.empty()) {
            throw std::invalid_argument("rule table line " + std::to_string(line_no) + ": empty label or pattern");
        }
        // Validate now; {peer} is checked with a placeholder name.
        std::string probe = rule.pattern;
        for (auto pos = probe.find(peer_token); pos != std::string::npos; pos = probe.find(peer_token)) {
            probe.replace(pos, peer_token.size(), "peer");
        }
        try {
            compile(probe);
        } catch (const std::regex_error& e) {
            throw std::invalid_argument("rule table line " + std::to_string(line_no) + ": bad pattern: " + e.what());
        }
        table.rules.push_back(std::move(rule));
    }
    return table;
}

RuleTable load_rule_table(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read rule table " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rule_table(ss.str());
}

RuleTable default_greeting_rules()
{
    return parse_rule_table(default_greeting_table);
}

RuleTable default_apt_rules()
{
    return parse_rule_table(default_apt_table);
}

std::vector<AnnotatedEvent> PresenceListener::on_input(const ListenerInput& input, ListenerContext& ctx)
{
    const auto& in = std::get<StateInput>(input);
    const auto kind = in.update.kind;
    if (kind != StateKind::presence_join && kind != StateKind::presence_leave) {
        return {};
    }
    return {ctx.make_event(name(), std::string(to_string(kind)), UpdateTrigger{in.log_seq}, in.update.payload)};
}

std::vector<AnnotatedEvent> SubtaskListener::on_input(const ListenerInput& input, ListenerContext& ctx)
{
    const auto& in = std::get<StateInput>(input);
    if (in.update.kind != StateKind::subtask_complete) {
        return {};
    }
    return {ctx.make_event(name(), "subtask_complete", UpdateTrigger{in.log_seq}, in.update.payload)};
}

std::vector<AnnotatedEvent> TurnListener::on_input(const ListenerInput& input, ListenerContext& ctx)
{
    const auto& m = std::get<ChatMessage>(input);
    if (m.role != Role::human) {
        return {};
    }
    return {ctx.make_event(name(), "chat", MessageTrigger{m.seq}, chat_payload(m))};
}

RuleListener::RuleListener(std::string name, RuleTable table) : name_(std::move(name))
{
    for (auto& rule : table.rules) {
        Compiled c{std::move(rule), false, {}};
        c.uses_peer = c.rule.pattern.find(peer_token) != std::string::npos;
        if (!c.uses_peer) {
            c.regex = compile(c.rule.pattern);
        }
        rules_.push_back(std::move(c));
    }
}

std::vector<AnnotatedEvent> RuleListener::on_input(const ListenerInput& input, ListenerContext& ctx)
{
    const auto& m = std::get<ChatMessage>(input);
    if (m.role != Role::human) {
        return {};
    }
    std::vector<AnnotatedEvent> events;
    std::vector<std::string> labels_seen;
    for (const auto& c : rules_) {
        if (std::find(labels_seen.begin(), labels_seen.end(), c.rule.label) != labels_seen.end()) {
            continue;
        }
        bool matched = false;
        if (c.uses_peer) {
            std::string peers;
            for (const auto& p : ctx.participants) {
                if (p == m.sender) {
                    continue;
                }
                peers += (peers.empty() ? "" : "|") + regex_escape(p);
            }
            if (peers.empty()) {
                continue;
            }
            std::string pattern = c.rule.pattern;
            const std::string group = "(?:" + peers + ")";
            for (auto pos = pattern.find(peer_token); pos != std::string::npos;
                 pos = pattern.find(peer_token, pos + group.size())) {
                pattern.replace(pos, peer_token.size(), group);
            }
            matched = std::regex_search(m.text, compile(pattern));
        } else {
            matched = std::regex_search(m.text, c.regex);
        }
        if (matched) {
            labels_seen.push_back(c.rule.label);
            events.push_back(ctx.make_event(name(), c.rule.label, MessageTrigger{m.seq}, chat_payload(m),
                                            Assessment{"rule line " + std::to_string(c.rule.line), 1.0}));
        }
    }
    return events;
}

void InactivityListener::start(Millis now)
{
    if (!last_human_at_) {
        last_human_at_ = now;
    }
}

std::optional<AnnotatedEvent> InactivityListener::tick(ListenerContext& ctx)
{
    start(ctx.now);
    if (!armed_ || ctx.now - *last_human_at_ < threshold_ms_) {
        return std::nullopt;
    }
    armed_ = false;
    ++periods_;
    Trigger trigger = last_human_seq_ ? Trigger{MessageTrigger{*last_human_seq_}} : Trigger{TickTrigger{ctx.now}};
    const auto silent_s = (ctx.now - *last_human_at_) / 1000;
    return ctx.make_event(name(), "inactivity", trigger, Payload{{"silent_s", std::to_string(silent_s)}, {"period", std::to_string(periods_)}},
                          Assessment{"no student chat for " + std::to_string(silent_s) + " s", 1.0});
}

std::vector<AnnotatedEvent> InactivityListener::on_input(const ListenerInput& input, ListenerContext& ctx)
{
    if (const auto* m = std::get_if<ChatMessage>(&input)) {
        if (m->role == Role::human) {
            last_human_at_ = m->ts;
            last_human_seq_ = m->seq;
            armed_ = true;
        }
        return {};
    }
    if (std::holds_alternative<ClockTick>(input)) {
        if (auto e = tick(ctx)) {
            return {std::move(*e)};
        }
    }
    return {};
}

} // namespace agora
