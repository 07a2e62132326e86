#pragma once

// Offline replay: drives a recorded transcript of client frames through the
// full gateway + pipeline on a virtual clock and captures every frame sent.
//
// Transcript lines:
//   {"at_ms":N, "conn":"c0", "frame":{...}}   client frame (conn defaults to "c0")
//   {"at_ms":N, "conn":"c0", "close":true}    client disconnect
//   {"at_ms":N, "end":true}                   stop time (optional)
// at_ms is snapped down to a multiple of the coordinator tick interval.
// Without an end line the run continues `drain_ms` past the last input.
//
// Captured lines: {"at_ms":N, "conn":"c0", "frame":{...}} in delivery order.

#include "agora/config.hpp"
#include "agora/llm.hpp"
#include "agora/plan.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace agora::replay {

struct TranscriptLine {
    enum class Kind { frame, close, end };
    Kind kind = Kind::frame;
    Millis at_ms = 0;
    std::string conn = "c0";
    nlohmann::json frame;
    std::size_t line = 0;
};

class MalformedTranscript : public std::runtime_error {
public:
    MalformedTranscript(std::size_t line, const std::string& detail)
        : std::runtime_error("transcript line " + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Blank lines are skipped. at_ms must be a non-negative integer and must not
// decrease from one line to the next.
std::vector<TranscriptLine> parse_transcript(std::istream& in);
std::vector<TranscriptLine> parse_transcript_file(const std::filesystem::path& path);

struct Options {
    config::ServerConfig server;
    std::vector<AgentConfig> agents;
    std::optional<Plan> plan;
    std::string mock_script;
    bool mock_fail_all = false;
    Millis mock_latency_ms = 1000;
    Millis drain_ms = 60'000;
    std::optional<std::filesystem::path> log_dir;
};

struct Result {
    std::vector<std::string> captured; // one compact JSON object per line
    std::vector<MockBackend::Request> requests;
};

Result run(const std::vector<TranscriptLine>& transcript, const Options& options);

// Removes every "ts" key, at any depth.
nlohmann::json strip_ts(nlohmann::json j);

struct Diff {
    bool identical = true;
    std::optional<std::size_t> first_index; // 0-based frame index
    std::string text;                       // unified diff, empty when identical
};

// Compares golden and actual capture lines after strip_ts. Lines that are
// not valid JSON are compared verbatim.
Diff diff_captures(const std::vector<std::string>& golden, const std::vector<std::string>& actual);

std::vector<std::string> read_lines(const std::filesystem::path& path);

} // namespace agora::replay
