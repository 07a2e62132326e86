#include "agora/replay.hpp"

#include "agora/gateway.hpp"
#include "agora/history.hpp"
#include "agora/sim.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace agora::replay {

namespace {

using json = nlohmann::json;

class CaptureConnection final : public Connection {
public:
    CaptureConnection(std::string id, const Clock& clock, std::vector<std::string>& sink)
        : id_(std::move(id)), clock_(clock), sink_(sink) {}

    void send(std::string frame) override
    {
        json line{{"at_ms", clock_.now_ms()}, {"conn", id_}, {"frame", json::parse(frame)}};
        sink_.push_back(line.dump());
    }
    void close() override {}

private:
    std::string id_;
    const Clock& clock_;
    std::vector<std::string>& sink_;
};

std::string normalized(const std::string& line)
{
    try {
        return strip_ts(json::parse(line)).dump();
    } catch (const json::exception&) {
        return line;
    }
}

} // namespace

std::vector<TranscriptLine> parse_transcript(std::istream& in)
{
    std::vector<TranscriptLine> out;
    std::string text;
    std::size_t lineno = 0;
    Millis last = 0;
    while (std::getline(in, text)) {
        ++lineno;
        if (trim(text).empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw MalformedTranscript(lineno, "invalid JSON");
        }
        if (!j.is_object()) {
            throw MalformedTranscript(lineno, "expected an object");
        }
        auto at = j.find("at_ms");
        if (at == j.end() || !at->is_number_integer() || at->get<std::int64_t>() < 0) {
            throw MalformedTranscript(lineno, "at_ms must be a non-negative integer");
        }
        TranscriptLine line;
        line.at_ms = at->get<Millis>();
        line.line = lineno;
        if (line.at_ms < last) {
            throw MalformedTranscript(lineno, "at_ms decreases");
        }
        last = line.at_ms;
        if (auto c = j.find("conn"); c != j.end()) {
            if (!c->is_string() || c->get<std::string>().empty()) {
                throw MalformedTranscript(lineno, "conn must be a non-empty string");
            }
            line.conn = c->get<std::string>();
        }
        const int kinds = int(j.contains("frame")) + int(j.contains("close")) + int(j.contains("end"));
        if (kinds != 1) {
            throw MalformedTranscript(lineno, "expected exactly one of frame, close, end");
        }
        if (auto f = j.find("frame"); f != j.end()) {
            if (!f->is_object()) {
                throw MalformedTranscript(lineno, "frame must be an object");
            }
            line.kind = TranscriptLine::Kind::frame;
            line.frame = *f;
        } else if (j.contains("close")) {
            line.kind = TranscriptLine::Kind::close;
        } else {
            line.kind = TranscriptLine::Kind::end;
        }
        out.push_back(std::move(line));
    }
    return out;
}

std::vector<TranscriptLine> parse_transcript_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MalformedTranscript(0, "cannot open " + path.string());
    }
    return parse_transcript(in);
}

Result run(const std::vector<TranscriptLine>& transcript, const Options& options)
{
    const Millis tick = std::max<Millis>(1, options.server.coordinator.tick_interval_ms);
    auto snap = [tick](Millis t) { return t - t % tick; };

    VirtualClock clock(0);
    SimLoop loop(clock);
    History history(clock, options.log_dir);
    MockBackend backend(options.mock_script);
    backend.set_fail_all(options.mock_fail_all);

    PipelineServices services{clock, history, backend, options.server, options.agents,
                              options.plan ? &*options.plan : nullptr};
    Gateway gateway(
        services, [](const SessionId&) { return std::make_unique<InlineExecutor>(); },
        [&](Executor&) { return std::make_unique<SimRunner>(loop, options.mock_latency_ms); });

    Result result;
    std::map<std::string, std::shared_ptr<CaptureConnection>> conns;
    auto conn_for = [&](const std::string& id) {
        auto& c = conns[id];
        if (!c) {
            c = std::make_shared<CaptureConnection>(id, clock, result.captured);
        }
        return c;
    };

    std::optional<Millis> end;
    Millis last_input = 0;
    for (const auto& line : transcript) {
        const Millis at = snap(line.at_ms);
        switch (line.kind) {
        case TranscriptLine::Kind::frame:
            last_input = at;
            loop.schedule(at, SimPhase::input,
                          [&, id = line.conn, text = line.frame.dump()] { gateway.on_frame(conn_for(id), text); });
            break;
        case TranscriptLine::Kind::close:
            last_input = at;
            loop.schedule(at, SimPhase::input, [&, id = line.conn] {
                auto it = conns.find(id);
                if (it != conns.end()) {
                    gateway.on_disconnect(it->second);
                    conns.erase(it);
                }
            });
            break;
        case TranscriptLine::Kind::end:
            end = at;
            break;
        }
    }
    const Millis stop = end ? *end : last_input + options.drain_ms;

    for (Millis t = 0; t <= stop; t += tick) {
        loop.schedule(t, SimPhase::tick, [&] { gateway.tick_all(); });
    }
    loop.run_until(stop);

    result.requests = backend.requests();
    return result;
}

json strip_ts(json j)
{
    if (j.is_object()) {
        j.erase("ts");
        for (auto& [_, v] : j.items()) {
            v = strip_ts(std::move(v));
        }
    } else if (j.is_array()) {
        for (auto& v : j) {
            v = strip_ts(std::move(v));
        }
    }
    return j;
}

Diff diff_captures(const std::vector<std::string>& golden, const std::vector<std::string>& actual)
{
    std::vector<std::string> a, b;
    for (const auto& l : golden) {
        a.push_back(normalized(l));
    }
    for (const auto& l : actual) {
        b.push_back(normalized(l));
    }

    Diff diff;
    const std::size_t common = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (a[i] != b[i]) {
            diff.first_index = i;
            break;
        }
    }
    if (!diff.first_index && a.size() != b.size()) {
        diff.first_index = common;
    }
    if (!diff.first_index) {
        return diff;
    }
    diff.identical = false;

    // LCS table over the normalized lines.
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        }
    }
    struct Op {
        char tag;
        std::size_t ai, bi;
    };
    std::vector<Op> ops;
    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && a[i] == b[j]) {
            ops.push_back({' ', i++, j++});
        } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
            ops.push_back({'-', i++, j});
        } else {
            ops.push_back({'+', i, j++});
        }
    }

    constexpr std::size_t context = 2;
    std::ostringstream out;
    out << "first difference at frame " << *diff.first_index << "\n";
    out << "--- golden\n+++ actual\n";
    std::size_t k = 0;
    while (k < ops.size()) {
        if (ops[k].tag == ' ') {
            ++k;
            continue;
        }
        // Grow a hunk until `context` unchanged ops separate it from the next change.
        std::size_t start = k >= context ? k - context : 0;
        std::size_t stop = k;
        while (stop < ops.size()) {
            std::size_t run = 0;
            while (stop + run < ops.size() && ops[stop + run].tag == ' ') {
                ++run;
            }
            if (stop + run >= ops.size() || run > 2 * context) {
                stop = std::min(ops.size(), stop + std::min(run, context));
                break;
            }
            stop += run;
            while (stop < ops.size() && ops[stop].tag != ' ') {
                ++stop;
            }
        }
        std::size_t a_count = 0, b_count = 0;
        for (std::size_t x = start; x < stop; ++x) {
            a_count += ops[x].tag != '+';
            b_count += ops[x].tag != '-';
        }
        out << "@@ -" << ops[start].ai + 1 << "," << a_count << " +" << ops[start].bi + 1 << "," << b_count
            << " @@\n";
        for (std::size_t x = start; x < stop; ++x) {
            const auto& op = ops[x];
            out << op.tag << (op.tag == '+' ? b[op.bi] : a[op.ai]) << "\n";
        }
        k = stop;
    }
    diff.text = out.str();
    return diff;
}

std::vector<std::string> read_lines(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

} // namespace agora::replay
